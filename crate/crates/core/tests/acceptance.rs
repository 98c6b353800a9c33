//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run
//! with `cargo test -p geomsum --test acceptance -- --nocapture` to see them.

use std::time::{Duration, Instant};

use geomsum::bounds::{self, BoundsOptions};
use geomsum::dist::{check_stochastic_dominance, geometric_to_tail, tv_distance, DOMINANCE_TOL};
use geomsum::greedy::{
    classify_greedy_case, dual_sst_dist, dual_sst_mean, greedy_dual_row, intertwining_residual,
    GreedyRegime,
};
use geomsum::hitting::hitting_time_dist;
use geomsum::sim::{empirical_tv, sample_dual_sst, sample_hitting_time, sample_many, SimConfig};
use geomsum::sst::fastest_sst_restricted;
use geomsum::{fixtures, IntDist, MarkovChain};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAIL_EPS: f64 = 1e-10;

fn report(id: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id}: {detail}");
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

#[test]
fn ac1_two_state_equality_case() {
    let start = Instant::now();
    let opts = BoundsOptions::default();
    let chain = fixtures::two_state(0.25).unwrap();
    let pi_ok = (chain.pi(0) - 1.0 / 3.0).abs() < 1e-12 && (chain.pi(1) - 2.0 / 3.0).abs() < 1e-12;

    let t = fastest_sst_restricted(&chain, 1, TAIL_EPS).unwrap();
    let surv = t.dist.survival_curve();
    let surv_ok = surv
        .iter()
        .enumerate()
        .all(|(k, s)| (s - 0.25f64.powi(k as i32)).abs() < 1e-12);
    let mean_t = t.dist.mean().value();

    let hit = hitting_time_dist(&chain, 1, TAIL_EPS).unwrap();
    let r = bounds::tv_report(&chain, 1, &t, &opts).unwrap();
    let elapsed = start.elapsed();

    let pass = pi_ok
        && surv_ok
        && (mean_t - 4.0 / 3.0).abs() < 1e-10
        && (hit.mean_direct - 2.0 / 3.0).abs() < 1e-8
        && (hit.mean_returns - 2.0 / 3.0).abs() < 1e-8
        && (hit.mean_direct - hit.mean_returns).abs() <= 1e-8
        && r.tv_bound.abs() <= 1e-10
        && r.tv_exact.value <= 1e-7
        && r.dominance.holds
        && within(elapsed, 1);
    report(
        "AC1 two-state equality",
        pass,
        &format!(
            "E T = {mean_t:.12}, E W = {:.12} / {:.12}, tv_bound = {:.3e}, tv_exact = {:.3e}, {:?}",
            hit.mean_direct, hit.mean_returns, r.tv_bound, r.tv_exact.value, elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn ac2_two_state_delta_sweep() {
    let start = Instant::now();
    let opts = BoundsOptions::default();
    let mut worst_bound: f64 = 0.0;
    let mut worst_lower: f64 = 0.0;
    for i in 1..=9 {
        let delta = 0.05 * i as f64;
        let chain = fixtures::two_state(delta).unwrap();
        let t = fastest_sst_restricted(&chain, 1, TAIL_EPS).unwrap();
        let b = bounds::tv_bound(&chain, 1, &t, opts.tail_eps).unwrap();
        let lower = bounds::sst_mean_lower_bound(&chain, 1).unwrap();
        let exact = 1.0 / (1.0 - delta);
        worst_bound = worst_bound.max(b.abs());
        worst_lower = worst_lower
            .max((lower - exact).abs())
            .max((t.dist.mean().value() - exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_bound <= 1e-9 && worst_lower <= 1e-9 && within(elapsed, 5);
    report(
        "AC2 two-state delta sweep",
        pass,
        &format!("max |tv_bound| = {worst_bound:.3e}, max |lower - E T| = {worst_lower:.3e}, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn ac3_mgf_equality() {
    let chain = fixtures::two_state(0.25).unwrap();
    let t = fastest_sst_restricted(&chain, 1, TAIL_EPS).unwrap();
    let m = bounds::mgf_bound(&chain, 1, &t, 1.5f64.ln(), TAIL_EPS).unwrap();
    let gate = m.gate.unwrap();
    let bound = m.bound.unwrap();
    let exact = m.exact.unwrap();
    let pass = (gate - 0.6).abs() <= 1e-9
        && (bound - 5.0 / 3.0).abs() <= 1e-9
        && (exact - 5.0 / 3.0).abs() <= 1e-9;
    report(
        "AC3 MGF equality",
        pass,
        &format!("gate = {gate:.12}, bound = {bound:.12}, exact = {exact:.12}"),
    );
    assert!(pass);
}

#[test]
fn ac4_greedy_dual_two_state() {
    let chain = fixtures::two_state(0.25).unwrap();
    let gd = greedy_dual_row(&chain, 1).unwrap();
    let fastest = fastest_sst_restricted(&chain, 1, TAIL_EPS).unwrap();
    let dual = dual_sst_dist(&gd, TAIL_EPS).unwrap();
    let n = fastest.dist.n_max().max(dual.dist.n_max());
    let max_diff = (0..=n)
        .map(|k| (fastest.dist.prob(k) - dual.dist.prob(k)).abs())
        .fold(0.0, f64::max);
    let mean = dual_sst_mean(&gd).unwrap();
    let pass = (gd.c[0] - 0.75).abs() < 1e-12
        && gd.sets[0] == vec![0, 1]
        && gd.sets[1] == vec![0]
        && (gd.p_absorb - 0.75).abs() < 1e-12
        && (gd.p_stay - 0.25).abs() < 1e-12
        && max_diff <= 1e-12
        && (mean - 4.0 / 3.0).abs() < 1e-12;
    report(
        "AC4 greedy dual reproduction",
        pass,
        &format!(
            "c_1 = {}, A = {:?}, p_absorb = {}, p_stay = {}, max |dual - fastest| = {max_diff:.3e}, E T = {mean}",
            gd.c[0], gd.sets, gd.p_absorb, gd.p_stay
        ),
    );
    assert!(pass);
}

#[test]
fn ac5_iid_rows_chain() {
    let opts = BoundsOptions::default();
    let chain = fixtures::iid_rows(&[0.5, 0.3, 0.2]).unwrap();
    let hit = hitting_time_dist(&chain, 2, TAIL_EPS).unwrap();
    let geom = geometric_to_tail(0.2, TAIL_EPS).unwrap();
    let tv_w = tv_distance(&hit.dist, &geom);
    let t = fastest_sst_restricted(&chain, 2, TAIL_EPS).unwrap();
    let t_is_one = t.dist.n_max() == 1 && (t.dist.prob(1) - 1.0).abs() < 1e-12;
    let u = geomsum::dist::geometric_compound(0.2, &t.dist, TAIL_EPS).unwrap();
    let tv_u = tv_distance(&u, &geom);
    let b = bounds::tv_bound(&chain, 2, &t, opts.tail_eps).unwrap();
    let gd = greedy_dual_row(&chain, 2).unwrap();
    let pass = tv_w.value <= 1e-10
        && t_is_one
        && tv_u.value <= 1e-10
        && b.abs() <= 1e-10
        && (gd.p_absorb - 1.0).abs() < 1e-12;
    report(
        "AC5 IID-rows chain",
        pass,
        &format!(
            "TV(W, Geom) = {:.3e}, TV(U, Geom) = {:.3e}, tv_bound = {b:.3e}, p_absorb = {}",
            tv_w.value, tv_u.value, gd.p_absorb
        ),
    );
    assert!(pass);
}

#[derive(Default, Debug)]
struct SweepTally {
    reports: usize,
    tv_bound: usize,
    dominance: usize,
    mean_chain: usize,
    sst_lower: usize,
    fastest_below_greedy: usize,
    invalid_intertwining: usize,
    violations_with_valid_intertwining: usize,
}

impl SweepTally {
    fn violations(&self) -> usize {
        self.tv_bound
            + self.dominance
            + self.mean_chain
            + self.sst_lower
            + self.fastest_below_greedy
    }
}

fn sweep_chains() -> Vec<MarkovChain> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_180_601);
    (0..100)
        .map(|_| fixtures::random_dirichlet(4, &mut rng).unwrap())
        .collect()
}

#[test]
fn ac6_random_sweep_fastest_sst() {
    let start = Instant::now();
    let opts = BoundsOptions::default();
    let mut tally = SweepTally::default();
    for chain in sweep_chains() {
        for j in 0..chain.len() {
            let t = fastest_sst_restricted(&chain, j, opts.tail_eps).unwrap();
            let r = bounds::tv_report(&chain, j, &t, &opts).unwrap();
            tally.reports += 1;
            tally.tv_bound +=
                usize::from(!(r.checks.tv_bound_holds && r.checks.tv_bound_nonnegative));
            tally.dominance += usize::from(!r.checks.dominance);
            tally.mean_chain +=
                usize::from(!(r.checks.mean_first && r.checks.mean_second.unwrap_or(false)));
            tally.sst_lower += usize::from(!r.checks.sst_mean_lower);
        }
    }
    let elapsed = start.elapsed();
    let pass = tally.violations() == 0 && tally.reports == 400 && within(elapsed, 60);
    report(
        "AC6 random sweep (fastest SST)",
        pass,
        &format!("{tally:?}, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn ac6_random_sweep_greedy_sst() {
    let start = Instant::now();
    let opts = BoundsOptions::default();
    let mut tally = SweepTally::default();
    for chain in sweep_chains() {
        for j in 0..chain.len() {
            let fastest = fastest_sst_restricted(&chain, j, opts.tail_eps).unwrap();
            let gd = greedy_dual_row(&chain, j).unwrap();
            let t = dual_sst_dist(&gd, opts.tail_eps).unwrap();
            let r = bounds::tv_report(&chain, j, &t, &opts).unwrap();
            let ordered = check_stochastic_dominance(&t.dist, &fastest.dist, DOMINANCE_TOL).holds;
            let before = tally.violations();
            tally.reports += 1;
            tally.tv_bound +=
                usize::from(!(r.checks.tv_bound_holds && r.checks.tv_bound_nonnegative));
            tally.dominance += usize::from(!r.checks.dominance);
            tally.mean_chain += usize::from(!r.checks.mean_first);
            tally.sst_lower += usize::from(!r.checks.sst_mean_lower);
            tally.fastest_below_greedy += usize::from(!ordered);
            let valid = intertwining_residual(&chain, &gd).unwrap() <= 1e-10;
            tally.invalid_intertwining += usize::from(!valid);
            if valid && tally.violations() > before {
                tally.violations_with_valid_intertwining += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = tally.violations() == 0 && tally.reports == 400 && within(elapsed, 60);
    report(
        "AC6 random sweep (greedy dual SST)",
        pass,
        &format!("{tally:?}, {elapsed:?}"),
    );
    assert!(pass, "greedy dual sweep: {tally:?}");
}

#[test]
fn ac7_regime_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_elsewhere = 0;
    let mut min_elsewhere_ok = 0;
    let mut unique = 0;
    let mut unique_worst: f64 = 0.0;
    for _ in 0..200 {
        let chain = fixtures::random_dirichlet(3, &mut rng).unwrap();
        for j in 0..3 {
            let class = classify_greedy_case(&chain, j).unwrap();
            let gd = greedy_dual_row(&chain, j).unwrap();
            let t = dual_sst_dist(&gd, 1e-14).unwrap().dist;
            match class.regime {
                GreedyRegime::MinElsewhere => {
                    min_elsewhere += 1;
                    let support_ok = t.n_max() <= 2 && t.tail_bound() == 0.0;
                    if support_ok && gd.p_stay == 0.0 && class.gamma == Some(gd.p_absorb) {
                        min_elsewhere_ok += 1;
                    }
                }
                GreedyRegime::UniqueMinAtJ => {
                    unique += 1;
                    let alpha = class.alpha.unwrap();
                    let beta = class.beta.unwrap();
                    unique_worst = unique_worst.max((t.prob(1) - alpha).abs());
                    for k in 2..=t.n_max() {
                        let want = (1.0 - alpha) * (1.0 - beta) * beta.powi(k as i32 - 2);
                        unique_worst = unique_worst.max((t.prob(k) - want).abs());
                    }
                }
                GreedyRegime::Degenerate => {}
            }
        }
    }
    let pass = min_elsewhere > 0
        && min_elsewhere_ok == min_elsewhere
        && unique > 0
        && unique_worst <= 1e-10;
    report(
        "AC7 regime classification",
        pass,
        &format!(
            "MinElsewhere {min_elsewhere_ok}/{min_elsewhere} with two-point support, UniqueMinAtJ {unique} with max pmf error {unique_worst:.3e}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac8_monte_carlo_consistency() {
    let start = Instant::now();
    let chain = fixtures::two_state(0.25).unwrap();
    let pi = chain.stationary().clone();
    let cfg = SimConfig::new(42, 8, 1_000_000).unwrap();
    let hit = hitting_time_dist(&chain, 1, 1e-14).unwrap();
    let w1 = sample_many(&cfg, |rng| sample_hitting_time(&chain, 1, &pi, rng)).unwrap();
    let w2 = sample_many(&cfg, |rng| sample_hitting_time(&chain, 1, &pi, rng)).unwrap();
    let tv_w = empirical_tv(&w1, &hit.dist).unwrap();

    let gd = greedy_dual_row(&chain, 1).unwrap();
    let t_exact: IntDist = dual_sst_dist(&gd, 1e-14).unwrap().dist;
    let t1 = sample_many(&cfg, |rng| sample_dual_sst(&gd, rng)).unwrap();
    let t2 = sample_many(&cfg, |rng| sample_dual_sst(&gd, rng)).unwrap();
    let tv_t = empirical_tv(&t1, &t_exact).unwrap();
    let elapsed = start.elapsed();

    let pass = tv_w <= 0.005 && tv_t <= 0.005 && w1 == w2 && t1 == t2 && within(elapsed, 30);
    report(
        "AC8 Monte Carlo consistency",
        pass,
        &format!(
            "TV(W) = {tv_w:.5}, TV(T) = {tv_t:.5}, reproducible = {}, {elapsed:?}",
            w1 == w2 && t1 == t2
        ),
    );
    assert!(pass);
}

#[test]
fn ac9_comparison_constant() {
    let delta = 0.25;
    let chain = fixtures::two_state(delta).unwrap();
    let t = fastest_sst_restricted(&chain, 1, TAIL_EPS).unwrap();
    let ours = bounds::tv_bound(&chain, 1, &t, TAIL_EPS).unwrap();
    let older = fixtures::comparison_two_state_bound(delta);
    // delta (1 - 2 delta) / (2 (1 - delta)^2) at delta = 1/4 is 1/9.
    let pass = (older - 1.0 / 9.0).abs() < 1e-15 && ours.abs() < 1e-10 && older > ours;
    report(
        "AC9 comparison constant",
        pass,
        &format!("older geometric bound = {older:.4}, this bound = {ours:.1e}"),
    );
    assert!(pass);
}
