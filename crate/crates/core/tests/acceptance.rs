//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) and then asserts its criterion.

use exindep::coefficients::{arratia_phi_tilde, audit, declustering, mixing_phi};
use exindep::experiments::{
    bound_audit_run, run_max_experiment, DepFamily, ExperimentConfig, ExperimentKind, GenFamily, Reference,
    SystemGenSpec, XGrid,
};
use exindep::gaussian::{
    berman_pair_bound, check_conditions, mills_bounds, sample_max, stationary_system, CorrelationFamily,
    ThresholdSet, DEFAULT_EPS,
};
use exindep::gumbel::{gumbel_cdf, norm_constants, product_max_cdf, tail_limit_check};
use exindep::numeric::normal_cdf;
use exindep::prob::reference::{correlated_pair, xor_system};
use exindep::prob::{DependencyGraph, EventSystem};
use exindep::tail_bounds::clique_overlap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

/// Serializes the criteria so that each runtime is measured alone.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, pass: bool, elapsed: Duration, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2}: {verdict} ({:.1} s) {detail}\n", elapsed.as_secs_f64());
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
}

/// Runs one criterion: `body` returns whether it holds and a detail line.
fn criterion<F: FnOnce() -> (bool, String)>(id: u32, limit: Option<Duration>, body: F) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (ok, mut detail) = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    if !in_time {
        detail.push_str(&format!(" [over the {:.0} s limit]", limit.unwrap().as_secs_f64()));
    }
    report(id, ok && in_time, elapsed, &detail);
    assert!(ok && in_time, "criterion {id} failed: {detail}");
}

fn audit_corpus() -> &'static exindep::experiments::AuditSummary {
    static CORPUS: OnceLock<exindep::experiments::AuditSummary> = OnceLock::new();
    CORPUS.get_or_init(|| bound_audit_run(&SystemGenSpec::default(), 10_000, 20_261_014).unwrap())
}

#[test]
fn criterion_01_main_bound_corpus() {
    criterion(1, Some(Duration::from_secs(60)), || {
        let start = Instant::now();
        let s = audit_corpus();
        let elapsed = start.elapsed();
        let thm1: Vec<_> = s.rows.iter().filter(|r| !r.audit.thm1_pass).map(|r| r.system_id).collect();
        let mut deps: Vec<_> = s.rows.iter().map(|r| format!("{:?}", r.dep_family)).collect();
        deps.sort();
        deps.dedup();
        let ok = thm1.is_empty()
            && s.rows.len() == 10_000
            && s.rows.iter().all(|r| (1..=8).contains(&r.d) && r.atoms <= 256)
            && deps.len() == SystemGenSpec::default().deps.len()
            && elapsed <= Duration::from_secs(60);
        (
            ok,
            format!(
                "{} systems, {} violations, worst residual {:.3e}, dep families {deps:?}",
                s.rows.len(),
                thm1.len(),
                s.worst.thm1
            ),
        )
    });
}

#[test]
fn criterion_02_one_sided_bounds() {
    criterion(2, None, || {
        let s = audit_corpus();
        let upper = s.rows.iter().filter(|r| !r.audit.upper_pass).count();
        let lower = s.rows.iter().filter(|r| !r.audit.lower_pass).count();
        let spec = SystemGenSpec::with_families(vec![GenFamily::Clustered], vec![DepFamily::Natural]);
        let blocks = bound_audit_run(&spec, 2000, 77).unwrap();
        let true_graphs = blocks.rows.iter().all(|r| r.audit.coefficients.phi_minus <= 1e-12);
        let dub = blocks.rows.iter().filter(|r| r.audit.dubickas_pass != Some(true)).count();
        let corpus_dub = s.rows.iter().filter(|r| r.audit.dubickas_pass == Some(false)).count();
        (
            upper == 0 && lower == 0 && true_graphs && dub == 0 && corpus_dub == 0,
            format!(
                "upper violations {upper}, lower violations {lower}; block systems: phi_minus <= 1e-12 on all {} = {true_graphs}, Dubickas violations {dub}; corpus Dubickas checks {} with {corpus_dub} violations",
                blocks.rows.len(),
                s.dubickas_checked
            ),
        )
    });
}

#[test]
fn criterion_03_coefficient_chains() {
    criterion(3, None, || {
        let s = audit_corpus();
        let chains = s.rows.iter().filter(|r| !r.audit.chains_pass).count();
        let arratia = s.rows.iter().filter(|r| !r.audit.arratia_ineq_pass).count();
        (
            chains == 0 && arratia == 0,
            format!(
                "chain violations {chains} (worst {:.3e}), union-form violations {arratia} (worst {:.3e})",
                s.worst.chains, s.worst.arratia_ineq
            ),
        )
    });
}

/// `P(∩ Ā_i)` minus the product of `P(Ā_i)`, by plain atom loops.
fn gap_oracle(sys: &EventSystem) -> f64 {
    let probs = sys.space().atom_probs();
    let hit = |i: usize, a: usize| sys.events()[i].atoms().contains(&a);
    let none: f64 = (0..probs.len()).filter(|&a| (0..sys.d()).all(|i| !hit(i, a))).map(|a| probs[a]).sum();
    let prod: f64 = (0..sys.d())
        .map(|i| 1.0 - (0..probs.len()).filter(|&a| hit(i, a)).map(|a| probs[a]).sum::<f64>())
        .product();
    (none - prod).abs()
}

/// `φ̃` for `D = ∅` by plain atom loops.
fn phi_tilde_oracle(sys: &EventSystem) -> f64 {
    let probs = sys.space().atom_probs();
    let hit = |i: usize, a: usize| sys.events()[i].atoms().contains(&a);
    let d = sys.d();
    let mut total = 0.0;
    for i in 0..d {
        let count = |a: usize| (0..d).filter(|&j| j != i && hit(j, a)).count();
        let pa: f64 = (0..probs.len()).filter(|&a| hit(i, a)).map(|a| probs[a]).sum();
        let mut l1 = 0.0;
        for k in 0..d {
            let p: f64 = (0..probs.len()).filter(|&a| count(a) == k).map(|a| probs[a]).sum();
            let pj: f64 = (0..probs.len()).filter(|&a| count(a) == k && hit(i, a)).map(|a| probs[a]).sum();
            l1 += (pj / pa - p).abs();
        }
        total += pa * l1;
    }
    total
}

#[test]
fn criterion_04_golden_values() {
    criterion(4, None, || {
        let x = xor_system();
        let empty = DependencyGraph::empty(3);
        let complete = DependencyGraph::complete(3);
        let a = audit(&x, &empty).unwrap();
        let phi = mixing_phi(&x, &empty).unwrap().phi;
        let c = declustering(&x, &complete).unwrap();
        let pair = correlated_pair();
        let tilde = arratia_phi_tilde(&pair, &DependencyGraph::empty(2)).unwrap();
        let tilde_oracle = phi_tilde_oracle(&pair);
        let close = |v: f64, want: f64| (v - want).abs() <= 1e-12;
        let checks = [
            ("gap", close(a.exact_gap, 0.125) && close(gap_oracle(&x), 0.125)),
            ("phi", close(phi, 0.25)),
            ("thm1_rhs", close(a.thm1_rhs, 0.21875)),
            ("delta1", close(c.delta1, 0.625)),
            ("delta2", close(c.delta2, 0.5)),
            ("phi_tilde vs enumeration", close(tilde, tilde_oracle)),
        ];
        let failed: Vec<_> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
        (
            failed.is_empty(),
            format!(
                "gap {} phi {phi} thm1_rhs {} delta1 {} delta2 {} phi_tilde {tilde} (enumeration {tilde_oracle}); failed {failed:?}",
                a.exact_gap, a.thm1_rhs, c.delta1, c.delta2
            ),
        )
    });
}

#[test]
fn criterion_05_binomial_gumbel_limit() {
    criterion(5, Some(Duration::from_secs(10)), || {
        let p = 0.5;
        let grid = XGrid::default().points();
        let mut sups = Vec::new();
        for d in [100u64, 1_000, 10_000, 100_000] {
            let n_trials = 100 * d;
            let c = norm_constants(d, n_trials, p).unwrap();
            let sup = grid
                .iter()
                .map(|&x| (product_max_cdf(d as f64, n_trials, p, x, &c).unwrap() - gumbel_cdf(x)).abs())
                .fold(0.0, f64::max);
            sups.push(sup);
        }
        let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
        let tail = tail_limit_check(100_000, 10_000_000, p, 0.0).unwrap();
        (
            decreasing && (tail - 1.0).abs() <= 0.25,
            format!("sup distances {sups:.4?}, tail check {tail:.4}"),
        )
    });
}

fn max_experiment(id: u32, limit: u64, cfg: ExperimentConfig, bound: f64) {
    criterion(id, Some(Duration::from_secs(limit)), || {
        let r = run_max_experiment(&cfg).unwrap();
        (
            r.ks <= bound && r.samples.len() == cfg.trials,
            format!("{} n={} trials={}: KS {:.4} (bound {bound})", cfg.kind, cfg.n, cfg.trials, r.ks),
        )
    });
}

#[test]
fn criterion_06_graph_max_degree() {
    let cfg = ExperimentConfig::new(ExperimentKind::GraphMaxdeg, 1000, 0.5, 1000, 6);
    max_experiment(6, 300, cfg, 0.08);
}

#[test]
fn criterion_07_hypergraph_max_degree() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::HypergraphMaxdeg, 200, 0.5, 500, 7);
    cfg.k = 3;
    max_experiment(7, 300, cfg, 0.10);
}

#[test]
fn criterion_08_max_codegree() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::HypergraphCodegree, 100, 0.5, 300, 8);
    cfg.k = 4;
    cfg.s = 2;
    max_experiment(8, 600, cfg, 0.12);
}

#[test]
fn criterion_09_triangle_extensions() {
    criterion(9, Some(Duration::from_secs(900)), || {
        let mut cfg = ExperimentConfig::new(ExperimentKind::CliqueExt, 500, 0.5, 500, 9);
        cfg.k = 3;
        cfg.reference = Reference::Gumbel;
        let r = run_max_experiment(&cfg).unwrap();
        let coupling = r.surrogate_ks.unwrap();
        (
            r.ks <= 0.15 && coupling <= 0.10,
            format!("KS vs Gumbel {:.4} (bound 0.15), KS clique counts vs conditional expectations {coupling:.4} (bound 0.10)", r.ks),
        )
    });
}

#[test]
fn criterion_10_common_neighbours() {
    criterion(10, Some(Duration::from_secs(600)), || {
        let mut cfg = ExperimentConfig::new(ExperimentKind::CommonNeighbours, 500, 0.5, 500, 10);
        cfg.h = 2;
        let r = run_max_experiment(&cfg).unwrap();
        let e = r.truncation_frequency.unwrap();
        (
            r.ks <= 0.10 && e >= 0.95,
            format!("KS vs independent product {:.4} (bound 0.10), truncation event frequency {e:.3} (needs 0.95)", r.ks),
        )
    });
}

#[test]
fn criterion_11_gaussian_extremal_independence() {
    criterion(11, Some(Duration::from_secs(120)), || {
        let d = 2000;
        let sys = stationary_system(d, CorrelationFamily::Ar1 { rho: 0.3 }, 1.0, 0.0).unwrap();
        let u = (2.0 * (d as f64).ln()).sqrt();
        let trials = 20_000;
        let maxima = sample_max(&sys, trials, 11).unwrap();
        let emp = maxima.iter().filter(|&&m| m <= u).count() as f64 / trials as f64;
        let indep = normal_cdf(u).powi(d as i32);
        let band = DependencyGraph::band(d, 5);
        let th = ThresholdSet::level(u);
        let ar = check_conditions(&sys, &th, &band, 0.3, DEFAULT_EPS).unwrap();
        let log_sys = stationary_system(d, CorrelationFamily::LogDecay { gamma: 1.0 }, 1.0, 0.0).unwrap();
        let lg = check_conditions(&log_sys, &th, &band, 0.95, DEFAULT_EPS).unwrap();
        let ok = (emp - indep).abs() <= 0.03 && ar.g2 <= 0.05 && !lg.g2_ok;
        (
            ok,
            format!(
                "P(max <= u) {emp:.4} vs Phi(u)^d {indep:.4}; AR(1) g2 {:.4}; log-decay g2 {:.3} raised {:?}",
                ar.g2,
                lg.g2,
                lg.raised()
            ),
        )
    });
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (1..=m)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// Nodes on `[lo, lo + panels·width]`, `panels` Gauss–Legendre panels.
fn panel_nodes(lo: f64, width: f64, panels: usize, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    (0..panels)
        .flat_map(|p| {
            let mid = lo + (p as f64 + 0.5) * width;
            rule.iter().map(move |&(x, w)| (mid + 0.5 * width * x, 0.5 * width * w))
        })
        .collect()
}

/// `|P(X > u, Y > v) − P(X > u) P(Y > v)|` for a standard bivariate normal
/// pair with correlation `r`, by tensor quadrature of the density
/// difference over the upper orthant.
fn bivariate_discrepancy(u: f64, v: f64, r: f64, rule: &[(f64, f64)]) -> f64 {
    let xs = panel_nodes(u, 0.25, 48, rule);
    let ys = panel_nodes(v, 0.25, 48, rule);
    let s = 1.0 - r * r;
    let c = 1.0 / (2.0 * PI * s.sqrt());
    let mut total = 0.0;
    for &(x, wx) in &xs {
        let mut inner = 0.0;
        for &(y, wy) in &ys {
            let joint = c * (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)).exp();
            let indep = (-(x * x + y * y) / 2.0).exp() / (2.0 * PI);
            inner += wy * (joint - indep);
        }
        total += wx * inner;
    }
    total.abs()
}

#[test]
fn criterion_12_analytic_sandwiches() {
    criterion(12, None, || {
        let mut mills_bad = 0;
        for i in 0..=900 {
            let x = 1.0 + i as f64 * 0.01;
            let q = 0.5 * libm::erfc(x / 2f64.sqrt());
            let (lo, hi) = mills_bounds(x).unwrap();
            if !(lo <= q && q <= hi) {
                mills_bad += 1;
            }
        }

        let rule = gauss_legendre(10);
        // Orthant identity at u = v = 0 checks the quadrature itself.
        let quad_err = (-8..=8)
            .map(|t| t as f64 * 0.1)
            .map(|r: f64| (bivariate_discrepancy(0.0, 0.0, r, &rule) - r.asin().abs() / (2.0 * PI)).abs())
            .fold(0.0, f64::max);
        let mut berman_bad = 0;
        let levels: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
        for t in -8..=8 {
            let r = t as f64 * 0.1;
            for (a, &ui) in levels.iter().enumerate() {
                for &uj in &levels[a..] {
                    let exact = bivariate_discrepancy(ui, uj, r, &rule);
                    if exact > berman_pair_bound(ui, uj, r).unwrap() + 1e-12 {
                        berman_bad += 1;
                    }
                }
            }
        }

        let mut overlap_bad = 0;
        for k in 3..=5u64 {
            let m = (k - 1) as u32;
            for j in (k - 1)..=12 {
                for p in [0.3, 0.7] {
                    let c = clique_overlap(j, k, p).unwrap();
                    let sets: Vec<u32> = (0u32..1 << j).filter(|s| s.count_ones() == m).collect();
                    let fixed = (1u32 << m) - 1;
                    let delta = sets.iter().filter(|&&s| (s & fixed).count_ones() >= 2).count() as u128;
                    let edges = (m * (m - 1) / 2) as i32;
                    // Ordered pairs tallied by intersection size, exactly.
                    let mut by_shared = [0u64; 5];
                    for &s in &sets {
                        for &t in &sets {
                            let l = (s & t).count_ones();
                            if s != t && l >= 2 {
                                by_shared[l as usize] += 1;
                            }
                        }
                    }
                    let pairs: f64 = (2..5u32)
                        .map(|l| by_shared[l as usize] as f64 * p.powi(2 * edges - (l * (l - 1) / 2) as i32))
                        .sum();
                    let mu = sets.len() as f64 * p.powi(edges);
                    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
                    if c.delta != delta || !rel(c.deltabar_pairs, pairs) || !rel(c.mu, mu) {
                        overlap_bad += 1;
                    }
                }
            }
        }
        (
            mills_bad == 0 && berman_bad == 0 && overlap_bad == 0 && quad_err < 1e-10,
            format!(
                "Mills violations {mills_bad}, Berman violations {berman_bad} (quadrature check error {quad_err:.1e}), overlap mismatches {overlap_bad}"
            ),
        )
    });
}
