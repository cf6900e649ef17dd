//! Acceptance checks. Prints one line per check and one verdict line per
//! criterion, and exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hetmeta::cli_io::{InputFile, ReportDocument};
use hetmeta::model::{self, full_panel, EffectSizeKind, MetaDataset, Study};
use hetmeta::sim::{self, SimConfig, Statistic};
use hetmeta::SmdMethod;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Root seed of every Monte Carlo criterion, fixed before any run.
const SEED: u64 = 20_240_601;
const REPS: usize = 10_000;
const GRID: [u32; 3] = [10, 50, 90];

struct Criterion {
    id: u8,
    title: &'static str,
    failed: usize,
    total: usize,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Self {
        println!("\n== criterion {id}: {title}");
        Criterion {
            id,
            title,
            failed: 0,
            total: 0,
        }
    }

    fn record(&mut self, pass: bool, line: String) {
        self.total += 1;
        if !pass {
            self.failed += 1;
        }
        println!("{} {line}", if pass { "PASS" } else { "FAIL" });
    }

    fn near(&mut self, name: &str, computed: f64, target: f64, tol: f64) {
        let pass = (computed - target).abs() <= tol;
        self.record(pass, format!("{name}: {computed:.6} (target {target} ± {tol})"));
    }

    fn holds(&mut self, name: &str, pass: bool, detail: String) {
        self.record(pass, format!("{name}: {detail}"));
    }

    fn within(&mut self, name: &str, elapsed: Duration, limit: Duration) {
        self.record(elapsed < limit, format!("{name}: {elapsed:.2?} (limit {limit:?})"));
    }

    fn finish(self) -> bool {
        let pass = self.failed == 0;
        println!(
            "CRITERION {} {}: {} ({} of {} checks passed)",
            self.id,
            if pass { "PASS" } else { "FAIL" },
            self.title,
            self.total - self.failed,
            self.total
        );
        pass
    }
}

fn report(file: &str, kind: EffectSizeKind) -> ReportDocument {
    let input = InputFile::bundled(file).expect("bundled dataset");
    ReportDocument::analyze(&input, kind, SmdMethod::HedgesG).expect("analysis succeeds")
}

fn jeong() -> bool {
    let mut c = Criterion::new(1, "Jeong replication");
    let start = Instant::now();
    let doc = report("jeong2014.csv", EffectSizeKind::Mean);
    let elapsed = start.elapsed();
    let p = &doc.panel;
    c.near("Q", p.q, 106.26, 0.01);
    c.near("I2", p.i2, 0.92, 0.01);
    c.near("n_tilde", p.n_tilde, 8.97, 0.01);
    c.near("I2_A", p.i2_a, 0.55, 0.01);
    c.near("ybar", p.size_weighted_mean, -7.55, 0.01);
    c.near("MSB", p.msb, 189.83, 0.01);
    c.near("MSW", p.msw, 25.81, 0.01);
    c.near("I2_ANOVA", p.i2_anova, 0.41, 0.01);
    c.within("runtime", elapsed, Duration::from_secs(1));
    c.finish()
}

fn avery_md() -> bool {
    let mut c = Criterion::new(2, "Avery mean-difference replication");
    let start = Instant::now();
    let doc = report("avery2022.csv", EffectSizeKind::MeanDifference);
    let elapsed = start.elapsed();
    for (i, (y, v, n)) in [(32.0, 272.14, 3.60), (-4.8, 20.29, 26.67), (-14.8, 65.48, 8.74)]
        .into_iter()
        .enumerate()
    {
        let s = &doc.studies[i];
        c.near(&format!("y[{}]", i + 1), s.y, y, 0.01);
        c.near(&format!("var_y[{}]", i + 1), s.var_y, v, 0.01);
        c.near(&format!("n_eff[{}]", i + 1), s.n, n, 0.01);
    }
    let p = &doc.panel;
    c.near("Q", p.q, 6.50, 0.01);
    c.near("I2", p.i2, 0.69, 0.01);
    c.near("n_tilde", p.n_tilde, 9.24, 0.01);
    c.near("I2_A", p.i2_a, 0.20, 0.01);
    c.near("MSB", p.msb, 2848.76, 0.01);
    c.near("MSW", p.msw, 586.93, 0.01);
    c.near("I2_ANOVA", p.i2_anova, 0.29, 0.01);
    c.within("runtime", elapsed, Duration::from_secs(1));
    c.finish()
}

fn avery_smd() -> bool {
    let mut c = Criterion::new(3, "Avery standardized-mean-difference replication");
    let doc = report("avery2022.csv", EffectSizeKind::StandardizedMeanDifference);
    for (i, (g, v)) in [(0.96, 0.31), (-0.20, 0.04), (-0.62, 0.12)].into_iter().enumerate() {
        c.near(&format!("g[{}]", i + 1), doc.studies[i].y, g, 0.01);
        c.near(&format!("var[{}]", i + 1), doc.studies[i].var_y, v, 0.01);
    }
    let p = &doc.panel;
    c.near("sum_w", p.sum_w, 38.12, 0.05);
    c.near("Q", p.q, 5.83, 0.01);
    c.near("w_tilde", p.adjustment.value(), 8.78, 0.01);
    c.near("I2", p.i2, 0.66, 0.01);
    c.near("I2_A", p.i2_a, 0.18, 0.01);
    c.near("I2_ANOVA", p.i2_anova, 0.19, 0.01);
    c.finish()
}

fn motivating() -> bool {
    let mut c = Criterion::new(4, "motivating example");
    let half = model::icc_ht(0.0025, 0.0025).unwrap();
    c.holds("ICC_HT(0.0025, 0.0025) == 0.5", half == 0.5, format!("{half}"));
    c.near("ICC_HT(0.0025, 0.00025)", model::icc_ht(0.0025, 0.00025).unwrap(), 0.9091, 0.0001);
    c.near("ICC_MA(0.0025, 1)", model::icc_ma(0.0025, 1.0).unwrap(), 0.002494, 0.000001);
    c.finish()
}

fn config(kind: EffectSizeKind, tau2: f64, sigma2: f64) -> SimConfig {
    let mut cfg = SimConfig::new(kind, 10, tau2, sigma2, REPS);
    cfg.n_grid = GRID.to_vec();
    cfg.seed = SEED;
    cfg
}

/// Monte Carlo means of I²_A and I²_ANOVA at every grid point against the
/// scenario's true ICC_MA.
fn check_scenario(c: &mut Criterion, label: &str, cfg: &SimConfig, tol: f64) -> Vec<sim::SimResult> {
    let results = sim::run_monte_carlo(cfg).expect("simulation runs");
    let truth = cfg.icc_ma_true();
    for r in &results {
        for stat in [Statistic::I2A, Statistic::I2Anova] {
            c.near(
                &format!("{label} n_base={} mean {}", r.n_base, stat.name()),
                r.mean(stat),
                truth,
                tol,
            );
        }
    }
    results
}

fn simulation_mean() -> bool {
    let mut c = Criterion::new(5, "simulation, mean kind");
    let start = Instant::now();
    check_scenario(&mut c, "tau2=9", &config(EffectSizeKind::Mean, 9.0, 100.0), 0.02);
    let high = check_scenario(&mut c, "tau2=90", &config(EffectSizeKind::Mean, 90.0, 100.0), 0.03);
    let i2: Vec<f64> = high.iter().map(|r| r.mean(Statistic::I2)).collect();
    c.holds(
        "tau2=90 mean I2 strictly increasing over the grid",
        i2.windows(2).all(|w| w[0] < w[1]),
        format!("{i2:.4?}"),
    );
    c.holds("tau2=90 mean I2 at n_base=90 > 0.9", i2[2] > 0.9, format!("{:.4}", i2[2]));
    c.within("runtime", start.elapsed(), Duration::from_secs(120));
    c.finish()
}

fn simulation_two_arm() -> bool {
    let mut c = Criterion::new(6, "simulation, MD and SMD kinds");
    check_scenario(&mut c, "MD tau2=0.09", &config(EffectSizeKind::MeanDifference, 0.09, 1.0), 0.02);
    check_scenario(&mut c, "MD tau2=0.9", &config(EffectSizeKind::MeanDifference, 0.9, 1.0), 0.03);
    let smd = EffectSizeKind::StandardizedMeanDifference;
    check_scenario(&mut c, "SMD tau2=0.09", &config(smd, 0.09, 1.0), 0.02);
    let cfg = config(smd, 0.9, 1.0);
    let high = check_scenario(&mut c, "SMD tau2=0.9", &cfg, 0.03);
    let truth = cfg.icc_ma_true();
    for r in &high {
        let err_anova = (r.mean(Statistic::I2Anova) - truth).abs();
        let err_a = (r.mean(Statistic::I2A) - truth).abs();
        c.holds(
            &format!("SMD tau2=0.9 n_base={} |I2_ANOVA err| <= |I2_A err| + 0.005", r.n_base),
            err_anova <= err_a + 0.005,
            format!("{err_anova:.4} vs {err_a:.4}"),
        );
    }
    c.finish()
}

fn lemma1() -> bool {
    let mut c = Criterion::new(7, "expected mean squares");
    let mut cfg = SimConfig::new(EffectSizeKind::Mean, 10, 9.0, 100.0, 100_000);
    cfg.seed = SEED;
    let r = sim::lemma1_check(&cfg, 30).expect("check runs");
    c.holds(
        "mean MSW within 1% of 100",
        r.rel_dev_msw.abs() <= 0.01,
        format!("{:.4} (rel {:+.5})", r.mean_msw, r.rel_dev_msw),
    );
    c.holds(
        "mean MSB within 2% of n~ tau2 + sigma2",
        r.rel_dev_msb.abs() <= 0.02,
        format!("{:.4} vs {:.4} (rel {:+.5})", r.mean_msb, r.expected_msb, r.rel_dev_msb),
    );
    c.finish()
}

fn dataset(rows: &[(f64, f64, u32)]) -> MetaDataset {
    MetaDataset::new(
        EffectSizeKind::Mean,
        rows.iter()
            .map(|&(y, var_y, n)| Study {
                y,
                var_y,
                n: f64::from(n),
            })
            .collect(),
    )
    .unwrap()
}

fn rows() -> impl Strategy<Value = Vec<(f64, f64, u32)>> {
    prop::collection::vec((-100.0..100.0f64, 0.01..100.0f64, 2u32..200), 2..=20)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn naive(rows: &[(i64, i64, i64)]) -> (f64, f64, f64) {
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    let (mut sw, mut swy, mut sn, mut sny) = (BigRational::zero(), BigRational::zero(), BigRational::zero(), BigRational::zero());
    for &(y, v, n) in rows {
        sw += r(1) / r(v);
        swy += r(y) / r(v);
        sn += r(n);
        sny += r(n) * r(y);
    }
    let (yw, yn) = (swy / sw, sny / sn);
    let (mut q, mut ssb, mut ssw, mut df) = (BigRational::zero(), BigRational::zero(), BigRational::zero(), BigRational::zero());
    for &(y, v, n) in rows {
        q += (r(y) - yw.clone()) * (r(y) - yw.clone()) / r(v);
        ssb += r(n) * (r(y) - yn.clone()) * (r(y) - yn.clone());
        ssw += r(n) * r(n - 1) * r(v);
        df += r(n - 1);
    }
    let k = r(rows.len() as i64);
    (
        q.to_f64().unwrap(),
        (ssb / (k - r(1))).to_f64().unwrap(),
        (ssw / df).to_f64().unwrap(),
    )
}

fn run_property<S: Strategy>(
    c: &mut Criterion,
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) {
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let outcome = runner.run(&strategy, test);
    let detail = match &outcome {
        Ok(()) => "10000 cases".to_string(),
        Err(e) => e.to_string(),
    };
    c.holds(name, outcome.is_ok(), detail);
}

fn properties() -> bool {
    let mut c = Criterion::new(8, "property suites");
    run_property(&mut c, "I2_A <= I2", rows(), |rows| {
        let p = full_panel(&dataset(&rows)).unwrap();
        prop_assert!(p.i2_a <= p.i2);
        Ok(())
    });
    run_property(&mut c, "statistics in [0, 1)", rows(), |rows| {
        let p = full_panel(&dataset(&rows)).unwrap();
        for v in [p.i2, p.i2_a, p.i2_anova] {
            prop_assert!((0.0..1.0).contains(&v));
        }
        Ok(())
    });
    let affine = (rows(), -50.0..50.0f64, prop_oneof![0.1..10.0f64, -10.0..-0.1f64]);
    run_property(&mut c, "affine invariance to 1e-10", affine, |(rows, a, b)| {
        let p = full_panel(&dataset(&rows)).unwrap();
        let moved: Vec<_> = rows.iter().map(|&(y, v, n)| (a + b * y, b * b * v, n)).collect();
        let t = full_panel(&dataset(&moved)).unwrap();
        for (x, y) in [(p.q, t.q), (p.i2, t.i2), (p.i2_a, t.i2_a), (p.i2_anova, t.i2_anova)] {
            prop_assert!(rel_close(x, y, 1e-10));
        }
        Ok(())
    });
    run_property(&mut c, "tau2 form of I2_A to 1e-10", rows(), |rows| {
        let p = full_panel(&dataset(&rows)).unwrap();
        let alt = (p.tau2_dl / (p.tau2_dl + p.n_tilde * p.sigma_tilde2)).max(0.0);
        prop_assert!((p.i2_a - alt).abs() <= 1e-10);
        Ok(())
    });
    let identity = (0.01..1000.0f64, prop::collection::vec((-10.0..10.0f64, 1u32..500), 2..=20));
    run_property(&mut c, "n~ sigma~2 == sigma2 to 1e-10", identity, |(s2, studies)| {
        let rows: Vec<_> = studies.iter().map(|&(y, n)| (y, s2 / f64::from(n), n)).collect();
        let ds = dataset(&rows);
        let n_tilde = model::adjusted_mean_n(&ds.sample_sizes()).unwrap();
        prop_assert!(rel_close(n_tilde * model::sigma_tilde2(&ds).unwrap(), s2, 1e-10));
        Ok(())
    });
    run_property(&mut c, "balanced n~ == n exactly", (1u32..10_000, 2usize..=50), |(n, k)| {
        prop_assert_eq!(model::adjusted_mean_n(&vec![f64::from(n); k]).unwrap(), f64::from(n));
        Ok(())
    });
    let bump = (prop::collection::vec(1u32..1000, 2..=20), any::<prop::sample::Index>(), 1u32..1000);
    run_property(&mut c, "(k-1)(n~-1) increasing in each n_i", bump, |(ns, idx, d)| {
        let sizes: Vec<f64> = ns.iter().map(|&n| f64::from(n)).collect();
        let k = sizes.len() as f64;
        let before = (k - 1.0) * (model::adjusted_mean_n(&sizes).unwrap() - 1.0);
        let mut bigger = sizes.clone();
        bigger[idx.index(sizes.len())] += f64::from(d);
        let after = (k - 1.0) * (model::adjusted_mean_n(&bigger).unwrap() - 1.0);
        prop_assert!(after > before);
        Ok(())
    });
    let small = prop::collection::vec((-5i64..=5, 1i64..=5, 2i64..=6), 2..=4);
    run_property(&mut c, "exact rational oracle to 1e-12", small, |rows| {
        let f: Vec<_> = rows.iter().map(|&(y, v, n)| (y as f64, v as f64, n as u32)).collect();
        let ds = dataset(&f);
        let (q, msb, msw) = naive(&rows);
        prop_assert!(rel_close(model::cochran_q(&ds), q, 1e-12));
        prop_assert!(rel_close(model::msb_ma(&ds), msb, 1e-12));
        prop_assert!(rel_close(model::msw_ma(&ds).unwrap(), msw, 1e-12));
        Ok(())
    });
    c.finish()
}

fn determinism() -> bool {
    let mut c = Criterion::new(9, "determinism of simulate");
    let dir = tempfile::tempdir().unwrap();
    let scenario = format!(
        "kind = \"smd\"\nk = 10\ntau2 = 0.9\nreps = 500\nn_grid = [10, 50, 90]\nseed = {SEED}\n"
    );
    std::fs::write(dir.path().join("scenario.toml"), scenario).unwrap();
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hetmeta"))
            .args(["simulate", "scenario.toml", "--threads", threads])
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let first = run("1");
    let second = run("1");
    let wide = run("4");
    c.holds("two runs byte-identical", first == second, format!("{} bytes", first.len()));
    c.holds("1 vs 4 workers byte-identical", first == wide, format!("{} bytes", wide.len()));
    c.finish()
}

fn main() -> ExitCode {
    let results = [
        jeong(),
        avery_md(),
        avery_smd(),
        motivating(),
        simulation_mean(),
        simulation_two_arm(),
        lemma1(),
        properties(),
        determinism(),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("\nacceptance: {passed} of {} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
