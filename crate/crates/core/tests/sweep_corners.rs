//! Threshold-sweep limit behaviour: the wide-open corner reproduces the
//! series run exactly, the closed corner leaves no detectable signal, and
//! judge perplexity is finite everywhere.

use textwm_core::dual::{DualConfig, Strategy};
use textwm_core::experiment::{run_experiment, sweep_thresholds, ExperimentSpec};
use textwm_core::model::{TextModel, TrainOptions};
use textwm_core::ngram::NGramModel;
use textwm_core::synth::{generate_corpus, CorpusSpec};

fn fixture() -> (TextModel, NGramModel, Vec<u32>) {
    let text = generate_corpus(&CorpusSpec::standard(9_000, 606));
    let lines: Vec<&str> = text.lines().collect();
    let model = TextModel::train(
        &lines[..4_000].join("\n"),
        &TrainOptions {
            order: 2,
            lambda: 1e-6,
            embed_dim: 16,
            embed_window: 2,
            embed_seed: 3,
        },
    )
    .unwrap();
    let judge_ids = model.vocab.encode(&lines[4_000..8_000].join("\n")).unwrap();
    let judge = NGramModel::train(&judge_ids, 2, 0.01, model.vocab_size()).unwrap();
    let natural = model.vocab.encode(&lines[8_000..].join("\n")).unwrap();
    (model, judge, natural)
}

fn spec(strategy: Strategy) -> ExperimentSpec {
    ExperimentSpec {
        watermark: DualConfig {
            strategy,
            max_tokens: 120,
            ..Default::default()
        },
        n_pos: 30,
        n_neg: 30,
        gen_len: 120,
        prompt_len: 8,
        attack: None,
        master_seed: 12,
    }
}

#[test]
fn corner_cells_match_limits() {
    let (model, judge, natural) = fixture();
    let grid = sweep_thresholds(
        &model,
        &judge,
        &natural,
        &spec(Strategy::Hybrid),
        &[0.0, f64::INFINITY],
        &[f64::INFINITY, f64::NEG_INFINITY],
    )
    .unwrap();
    assert_eq!(grid.cells.len(), 4);

    // (alpha=0, beta=inf): every token carries both watermarks, token for
    // token equal to the series strategy, so the metrics match exactly.
    let open = grid
        .cells
        .iter()
        .find(|c| c.alpha == 0.0 && c.beta.is_infinite() && c.beta > 0.0)
        .unwrap();
    let series = run_experiment(&model, &natural, &spec(Strategy::Series)).unwrap();
    assert_eq!(open.best_f1, series.summary.best_f1);
    assert_eq!(open.auc, series.summary.auc);
    assert_eq!(open.ratio_both, 1.0);

    // (alpha=inf, beta=-inf): nothing is watermarked; detection collapses
    // to chance.
    let closed = grid
        .cells
        .iter()
        .find(|c| c.alpha.is_infinite() && c.beta.is_infinite() && c.beta < 0.0)
        .unwrap();
    assert_eq!(closed.ratio_none, 1.0);
    assert!(closed.auc <= 0.6, "unwatermarked corner AUC {}", closed.auc);

    for cell in &grid.cells {
        assert!(cell.mean_judge_ppl.is_finite() && cell.mean_judge_ppl >= 1.0);
    }
}
