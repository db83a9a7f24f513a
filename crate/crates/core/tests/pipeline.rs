use chrono::NaiveDate;
use proptest::prelude::*;
use stockbot_core::dataset::*;
use stockbot_core::forecast::*;
use stockbot_core::lstm::{Architecture, Network, NetworkSpec};
use stockbot_core::ndcore::Rng;
use stockbot_core::optim::{train, LossKind, TrainConfig};
use stockbot_core::stockbot::*;

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 3, 2).unwrap()
}

fn series(ticker: &str, v: &[f64]) -> PriceSeries {
    PriceSeries::from_prices(ticker, day0(), v).unwrap()
}

fn spec(ph: usize, fl: usize) -> NetworkSpec {
    NetworkSpec {
        architecture: Architecture::StackedLstm,
        stack_depth: 1,
        units: 4,
        input_dim: 1,
        past_history: ph,
        forward_look: fl,
    }
}

proptest! {
    #[test]
    fn window_count_and_ordering(len in 1usize..=50, ph in 1usize..=10, fl in 1usize..=5) {
        let v: Vec<f64> = (0..len).map(|k| k as f64).collect();
        let s = series("A", &v);
        match make_windows(&s, ph, fl) {
            Err(_) => prop_assert!(len < ph + fl),
            Ok(ds) => {
                prop_assert_eq!(ds.len(), len - ph - fl + 1);
                for (k, src) in ds.sources.iter().enumerate() {
                    prop_assert!(src.input_end_date < src.target_end_date);
                    // Values equal row indices, so targets must follow the inputs.
                    let last_input = ds.inputs[k].get(ph - 1, 0);
                    prop_assert!(ds.targets[k].iter().all(|&t| t > last_input));
                }
            }
        }
    }

    #[test]
    fn split_respects_dates(n in 2usize..60, ratio in 0.05f64..0.95) {
        let v: Vec<f64> = (0..n + 3).map(|k| k as f64).collect();
        let ds = make_windows(&series("A", &v), 3, 1).unwrap();
        let (tr, dv) = split_train_dev(&ds, ratio).unwrap();
        prop_assert_eq!(tr.len() + dv.len(), ds.len());
        let last_train = tr.sources.iter().map(|s| s.target_end_date).max();
        let first_dev = dv.sources.iter().map(|s| s.target_end_date).min();
        if let (Some(a), Some(b)) = (last_train, first_dev) {
            prop_assert!(a <= b);
        }
    }
}

#[test]
fn holdout_modes_are_disjoint() {
    let list: Vec<PriceSeries> = ["A", "B", "C"]
        .iter()
        .map(|t| series(t, &(0..30).map(|k| k as f64).collect::<Vec<_>>()))
        .collect();
    let (tr, dv) = build_multistock(&list, 5, 2, 0.8, false, Some("B")).unwrap();
    assert!(tr.sources.iter().all(|s| s.ticker != "B"));
    assert!(dv.sources.iter().all(|s| s.ticker == "B"));
    let (tr, dv) = build_multistock(&list, 5, 2, 0.8, true, None).unwrap();
    for t in ["A", "B", "C"] {
        let last_train = tr.sources.iter().filter(|s| s.ticker == t).map(|s| s.start).max().unwrap();
        let first_dev = dv.sources.iter().filter(|s| s.ticker == t).map(|s| s.start).min().unwrap();
        assert!(last_train < first_dev);
    }
}

/// Two-pass sample covariance, written independently of the library.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0);
    let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (n - 1.0);
    let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / (n - 1.0);
    cov / (va * vb).sqrt()
}

#[test]
fn correlation_matches_covariance_oracle() {
    let mut rng = Rng::new(21);
    let cols: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..80).map(|_| rng.uniform(1.0, 5.0)).collect())
        .collect();
    let list: Vec<PriceSeries> = cols.iter().enumerate().map(|(i, c)| series(&format!("T{i}"), c)).collect();
    let r = correlation_matrix(&list).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { 1.0 } else { pearson(&cols[i], &cols[j]) };
            assert!((r.matrix.get(i, j) - expect).abs() < 1e-10);
            assert_eq!(r.matrix.get(i, j), r.matrix.get(j, i));
        }
    }
}

#[test]
fn constant_forecast_never_trades() {
    let s = ScaledSeries::fit(series("A", &[5.0, 4.0, 6.0, 3.0, 7.0, 2.0, 8.0]), 7).unwrap();
    let net = Network::zeros(spec(3, 1)).unwrap();
    let (ledger, summary) = backtest(&net, &s, 3, 3, 100.0, DecisionSource::Predicted).unwrap();
    assert_eq!(summary.trade_count, 0);
    assert_eq!(summary.final_growth_pct, 0.0);
    assert_eq!(ledger.rows.len(), 3);
}

#[test]
fn oracle_backtest_on_v_shape() {
    let s = ScaledSeries::fit(series("V", &[9.0, 9.0, 3.0, 2.0, 1.0, 2.0, 3.0]), 7).unwrap();
    let net = Network::zeros(spec(2, 1)).unwrap();
    let (ledger, summary) = backtest(&net, &s, 2, 5, 100.0, DecisionSource::Oracle).unwrap();
    assert_eq!(summary.buy_days, vec![2]);
    assert_eq!(ledger.rows[2].price, 1.0);
    assert_eq!(ledger.final_value(), 300.0);
    assert_eq!(summary.final_growth_pct, 200.0);
    assert_eq!(ledger.dates.as_ref().unwrap()[0], day0() + chrono::Days::new(2));
    assert!(backtest(&net, &s, 2, 2, 100.0, DecisionSource::Oracle).is_err());
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let v: Vec<f64> = (0..160).map(|t| (t as f64 * 0.25).sin()).collect();
    let s = ScaledSeries::fit(series("S", &v), training_rows(160, 10, 1, 0.8)).unwrap();
    let (tr, dv) = split_train_dev(&make_windows(&s.scaled, 10, 1).unwrap(), 0.8).unwrap();
    let cfg = TrainConfig {
        batch_size: 16,
        epochs: 6,
        steps_per_epoch: 20,
        validation_steps: 4,
        seed: 3,
        ..Default::default()
    };
    let run = || {
        let mut net = Network::new(spec(10, 1), &mut Rng::new(3)).unwrap();
        let h = train(&mut net, &tr, &dv, &cfg, LossKind::Plain).unwrap();
        (net, h)
    };
    let (a, ha) = run();
    let (b, hb) = run();
    assert_eq!(ha.to_csv(), hb.to_csv());
    assert_eq!(a, b);
    assert!(ha.last().unwrap().train_loss < ha.epochs[0].train_loss);
    let f = teacher_forced_rollout(&a, &s, 130, 20).unwrap();
    let truth: Vec<f64> = (130..150).map(|r| s.scaled.features.get(r, 0)).collect();
    assert!(rmse(&f.scaled(), &truth).unwrap().is_finite());
}

#[test]
fn grid_diagonal_for_identical_models() {
    let v: Vec<f64> = (0..40).map(|t| 1.0 + (t as f64 * 0.4).cos()).collect();
    let s = ScaledSeries::fit(series("A", &v), 40).unwrap();
    let net = Network::new(spec(5, 1), &mut Rng::new(8)).unwrap();
    let target = EvalTarget { series: s, start: 20, horizon: 10 };
    let g = rmse_grid(&[&net, &net], &[target.clone(), target]).unwrap();
    assert_eq!(g.shape(), (2, 2));
    assert!(g.data().iter().all(|&x| x == g.get(0, 0)));
    assert!(rmse_grid(&[&net], &[]).unwrap().is_empty());
}
