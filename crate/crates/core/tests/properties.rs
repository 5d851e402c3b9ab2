//! Property tests over the pure numeric stages.

use nalgebra::DMatrix;
use proptest::prelude::*;

use loadcast::bau::{fit_elastic_net, EnetOptions};
use loadcast::cooling::{circular_convolve, income_weights, CddScaler};
use loadcast::ev::{electrification_share, ev_hourly, EvConfig, Segment};
use loadcast::gdp::{fit_exponential, group_shares, GdpScenario, GrowthCurve, Population};
use loadcast::hourly::fit_day;
use loadcast::ingest::PopulationRow;

fn unit_shape() -> impl Strategy<Value = [f64; 24]> {
    proptest::array::uniform24(0.05f64..2.0)
}

fn normalized(w: &[f64; 24]) -> [f64; 24] {
    let s: f64 = w.iter().sum();
    std::array::from_fn(|h| w[h] / s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_day_hits_energy_and_peak(shape in unit_shape(), energy in 1.0f64..1e7, t in 0.0f64..1.0) {
        let peak = energy / 24.0 + t * (energy - energy / 24.0);
        let day = fit_day(&shape, energy, peak).unwrap();
        let sum: f64 = day.values.iter().sum();
        let max = day.values.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!((sum - energy).abs() <= 1e-9 * energy);
        prop_assert!((max - peak).abs() <= 1e-9 * peak);
        prop_assert!(day.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn fitted_day_keeps_the_argmax(shape in unit_shape(), energy in 1.0f64..1e5, t in 0.05f64..0.9) {
        let peak = energy / 24.0 * (1.0 + t);
        let day = fit_day(&shape, energy, peak).unwrap();
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
        prop_assert_eq!(argmax(&day.values), argmax(&shape));
    }

    #[test]
    fn electrification_share_is_bounded_and_monotone(seg in 0usize..3, scen in 0usize..3, year in 2015i32..2060) {
        let cfg = EvConfig::default();
        let seg = [Segment::E2W, Segment::E3W, Segment::E4W][seg];
        let scen = GdpScenario::ALL[scen];
        let now = electrification_share(seg, scen, year, &cfg);
        let next = electrification_share(seg, scen, year + 1, &cfg);
        prop_assert!((0.0..=1.0).contains(&now));
        prop_assert!(next >= now);
    }

    #[test]
    fn faster_scenarios_electrify_no_slower(seg in 0usize..3, year in 2020i32..2055) {
        let cfg = EvConfig::default();
        let seg = [Segment::E2W, Segment::E3W, Segment::E4W][seg];
        let s = |g| electrification_share(seg, g, year, &cfg);
        prop_assert!(s(GdpScenario::Slow) <= s(GdpScenario::Stable));
        prop_assert!(s(GdpScenario::Stable) <= s(GdpScenario::Rapid));
    }

    #[test]
    fn cdd_multiplier_is_monotone(year in 1990i32..2070) {
        let s = CddScaler::default();
        prop_assert!(s.multiplier(year + 1) >= s.multiplier(year));
        prop_assert!((1.0..=1.5).contains(&s.multiplier(year)));
    }

    #[test]
    fn ev_trace_conserves_daily_energy(daily in 0.0f64..1e5, wd in unit_shape(), we in unit_shape(), year in 2020i32..2051) {
        let trace = ev_hourly(daily, year, &normalized(&wd), &normalized(&we));
        prop_assert_eq!(trace.len(), 8760);
        for day in trace.chunks(24) {
            let s: f64 = day.iter().sum();
            prop_assert!((s - daily).abs() <= 1e-9 * daily.max(1.0));
        }
    }

    #[test]
    fn convolution_preserves_mass(p in unit_shape(), k in proptest::collection::vec(0.0f64..1.0, 1..7)) {
        let ks: f64 = k.iter().sum::<f64>().max(1e-12);
        let kernel: Vec<f64> = k.iter().map(|v| v / ks).collect();
        let out = circular_convolve(&p, &kernel);
        let (a, b): (f64, f64) = (p.iter().sum(), out.iter().sum());
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0) || ks <= 1e-12);
    }

    #[test]
    fn income_weights_form_a_partition(rank in -0.5f64..1.5, tiers in 1usize..6) {
        let w = income_weights(rank, tiers);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn group_shares_sum_to_one(values in proptest::collection::vec((1.0f64..1e4, 0.1f64..300.0), 1..8)) {
        let names: Vec<String> = (0..values.len()).map(|i| format!("S{i}")).collect();
        let rows: Vec<PopulationRow> = names.iter().zip(&values).map(|(n, (_, p))| PopulationRow { state: n.clone(), year: 2030, pop: *p }).collect();
        let pop = Population::from_rows(&rows);
        let members: Vec<&str> = names.iter().map(String::as_str).collect();
        let gdp = |s: &str| names.iter().position(|n| n == s).map(|i| values[i].0);
        let shares = group_shares("G", &members, gdp, &pop, 2030).unwrap();
        let total: f64 = shares.iter().map(|s| s.share).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(shares.iter().all(|s| s.share > 0.0));
    }

    #[test]
    fn exponential_refit_is_idempotent(a in 1e10f64..1e12, b in 0.02f64..0.1) {
        let xs: Vec<f64> = (0..30).map(f64::from).collect();
        let truth = GrowthCurve::exponential(a, b, 0.0);
        let ys: Vec<f64> = xs.iter().map(|x| truth.eval(*x)).collect();
        let first = fit_exponential(&xs, &ys).unwrap();
        let again: Vec<f64> = xs.iter().map(|x| first.eval(*x)).collect();
        let second = fit_exponential(&xs, &again).unwrap();
        for x in [0.0, 15.0, 29.0, 40.0] {
            let (u, v) = (first.eval(x), second.eval(x));
            prop_assert!((u - v).abs() <= 1e-6 * u, "{} vs {}", u, v);
        }
    }

    #[test]
    fn elastic_net_satisfies_kkt(
        seed in any::<u64>(),
        n in 8usize..40,
        p in 1usize..6,
        alpha in 0.0f64..1.0,
        rho in 0.0f64..1.0,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] * 3.0 + rng.random::<f64>()).collect();
        let fit = fit_elastic_net(&x, &y, alpha, rho, EnetOptions::default()).unwrap();
        let nf = n as f64;
        let resid: Vec<f64> = (0..n).map(|i| y[i] - fit.predict_row(x.row(i).iter().copied())).collect();
        prop_assert!(resid.iter().sum::<f64>().abs() < 1e-6 * nf);
        for j in 0..p {
            let col: Vec<f64> = x.column(j).iter().copied().collect();
            let m = col.iter().sum::<f64>() / nf;
            let bj = fit.coefficients[j];
            let g = col.iter().zip(&resid).map(|(v, r)| (v - m) * r).sum::<f64>() / nf - alpha * (1.0 - rho) * bj;
            if bj != 0.0 {
                prop_assert!((g - alpha * rho * bj.signum()).abs() < 1e-6, "coord {}: {}", j, g);
            } else {
                prop_assert!(g.abs() <= alpha * rho + 1e-6, "coord {}: {}", j, g);
            }
        }
    }
}
