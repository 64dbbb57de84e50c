//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs with `cargo test -p rml-core --test acceptance`. The process exits 0
//! after reporting so the workspace test run completes; set
//! `ACCEPTANCE_STRICT=1` to exit nonzero when any criterion fails.

mod common;

use std::time::Instant;

use common::{fd_jacobian, rel_err, stack};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rml_core::model::{example1, example2, example3_transformed, gauss_linear_toy};
use rml_core::oracle::{compare_samples_to_grid, conjugate_posterior, default_axes, grid_marginal, mode_occupation, GridAxis, GridDensity};
use rml_core::output::write_trace_csv;
use rml_core::proposal::{inverse_transform, jacobian_blocks, log_abs_det_jacobian, propose};
use rml_core::rng::derive_chain_seed;
use rml_core::sampler::{run_chain_augmented, run_chain_legacy_1d, QuadSettings};
use rml_core::{ChainRecord, HyperParams, JacobianMode, OptSettings, ProblemSpec};

const SEED: u64 = 1;
const N_STEPS: usize = 40_000;
/// Chains pooled for the Example 1 acceptance-rate estimates.
const POOLED_CHAINS: u64 = 4;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id:>3}  {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn note(&self, text: String) {
        println!("          {text}");
    }
}

fn hp(rho: f64) -> HyperParams {
    HyperParams::new(0.01, rho).expect("valid hyperparameters")
}

fn chain(p: &ProblemSpec, rho: f64, seed: u64, mode: JacobianMode) -> ChainRecord {
    run_chain_augmented(p, &hp(rho), &OptSettings::default(), N_STEPS, seed, mode).expect("chain runs")
}

fn within(v: f64, centre: f64, tol: f64) -> bool {
    (v - centre).abs() <= tol
}

/// Acceptance pooled over chains seeded `derive_chain_seed(SEED, i)`, the
/// seeds a `--chains` run of the command-line tool uses.
fn pooled_example1(rho: f64) -> (f64, Vec<f64>) {
    let p = example1();
    let mut accepted = 0;
    let mut proposed = 0;
    let mut per_chain = Vec::new();
    for i in 0..POOLED_CHAINS {
        let rec = chain(&p, rho, derive_chain_seed(SEED, i), JacobianMode::Full);
        accepted += rec.n_accepted;
        proposed += rec.n_proposed;
        per_chain.push(rec.acceptance_rate());
    }
    (accepted as f64 / proposed as f64, per_chain)
}

fn fmt_rates(rates: &[f64]) -> String {
    rates.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
}

fn criteria_1_2(rep: &mut Report) {
    let (rate, per) = pooled_example1(0.65);
    rep.check(
        "1",
        "Example 1 acceptance, rho 0.65",
        (0.60..=0.66).contains(&rate),
        format!("{rate:.4} in [0.60, 0.66] ({POOLED_CHAINS} x {N_STEPS} steps; per chain {})", fmt_rates(&per)),
    );
    let mut all = true;
    let mut parts = Vec::new();
    for rho in [0.5, 0.8] {
        let (rate, per) = pooled_example1(rho);
        all &= (0.60..=0.66).contains(&rate);
        parts.push(format!("rho {rho}: {rate:.4} (per chain {})", fmt_rates(&per)));
    }
    rep.check("2", "Example 1 acceptance, rho 0.5 and 0.8", all, format!("{} in [0.60, 0.66]", parts.join("; ")));
}

fn criterion_3(rep: &mut Report) {
    let p = example1();
    let rec = chain(&p, 0.65, SEED, JacobianMode::Full);
    let grid = grid_marginal(&p, &default_axes(&p, 4097).unwrap()).unwrap();
    let report = compare_samples_to_grid(&rec.samples(0), &grid, 64).unwrap();
    let modes = grid.find_modes().len();
    rep.check(
        "3",
        "Example 1 chain vs quadrature",
        report.tv_distance < 0.05 && modes == 2,
        format!("TV {:.4} < 0.05 (64 bins, {N_STEPS} states); {modes} modes, need 2", report.tv_distance),
    );
}

fn criteria_4_5_6(rep: &mut Report) {
    let p = example2();
    let full_35 = chain(&p, 0.35, SEED, JacobianMode::Full);
    let full_60 = chain(&p, 0.60, SEED, JacobianMode::Full);
    let (a, b) = (full_35.acceptance_rate(), full_60.acceptance_rate());
    rep.check(
        "4",
        "Example 2 acceptance, full Jacobian",
        within(a, 0.11, 0.02) && (a - b).abs() < 0.01,
        format!("rho 0.35: {a:.4} (need 0.11 +- 0.02); rho 0.60: {b:.4}; gap {:.2} pp (need < 1)", 100.0 * (a - b).abs()),
    );
    let prefix = |r: &ChainRecord| r.accept_flags[..4_000].iter().filter(|f| **f).count() as f64 / 4_000.0;
    rep.note(format!(
        "first 4000 steps: rho 0.35 {:.4}, rho 0.60 {:.4}; optimizer failures {} and {}",
        prefix(&full_35),
        prefix(&full_60),
        full_35.n_optfail,
        full_60.n_optfail
    ));

    let gn = chain(&p, 0.35, SEED, JacobianMode::GaussNewton);
    let g = gn.acceptance_rate();
    rep.check("5", "Example 2 acceptance, Gauss-Newton Jacobian", within(g, 0.55, 0.05), format!("{g:.4} (need 0.55 +- 0.05)"));

    let grid = grid_marginal(&p, &default_axes(&p, 401).unwrap()).unwrap();
    let masses = grid.mode_masses();
    let occ_full = mode_occupation(&full_35.samples(0), &grid).unwrap();
    let none = chain(&p, 0.35, SEED, JacobianMode::None);
    let occ_none = mode_occupation(&none.samples(0), &grid).unwrap();
    let dev = |occ: &[f64]| occ.iter().zip(&masses).map(|(o, m)| (o - m).abs()).fold(0.0, f64::max);
    let (dev_full, dev_none) = (dev(&occ_full), dev(&occ_none));
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    rep.check(
        "6",
        "Example 2 mode occupation",
        dev_full <= 0.05 && dev_none > 0.05,
        format!("full max dev {dev_full:.3} (need <= 0.05); no MH test max dev {dev_none:.3} (need > 0.05)"),
    );
    rep.note(format!(
        "mode masses [{}]; full [{}]; no MH test [{}] with acceptance {:.4}",
        fmt(&masses),
        fmt(&occ_full),
        fmt(&occ_none),
        none.acceptance_rate()
    ));
}

fn criterion_7(rep: &mut Report) {
    let p = example3_transformed();
    let rec = chain(&p, 0.25, SEED, JacobianMode::Full);
    let rate = rec.acceptance_rate();
    // exponential prior with unit mean, observation 1 with variance 0.36
    let axis = GridAxis::new(0.0, 6.0, 4097).unwrap();
    let grid = GridDensity::from_log_fn(vec![axis], |c| Ok(-c[0] - (c[0] - 1.0).powi(2) / (2.0 * 0.36))).unwrap();
    let back: Vec<DVector<f64>> = rec.xs().map(|z| p.to_original(z)).collect();
    let report = compare_samples_to_grid(&back, &grid, 64).unwrap();
    rep.check(
        "7",
        "Example 3 acceptance and back-transformed posterior",
        within(rate, 0.74, 0.04) && report.tv_distance < 0.05,
        format!("acceptance {rate:.4} (need 0.74 +- 0.04); TV {:.4} < 0.05", report.tv_distance),
    );
}

fn criterion_8(rep: &mut Report) {
    let s = OptSettings::default();
    let ex1 = run_chain_legacy_1d(&example1(), &s, N_STEPS, SEED, QuadSettings::default()).unwrap();
    let lin = run_chain_legacy_1d(&gauss_linear_toy(), &s, 10_000, SEED, QuadSettings::default()).unwrap();
    let (a, b) = (ex1.acceptance_rate(), lin.acceptance_rate());
    rep.check(
        "8",
        "Marginal one-dimensional sampler",
        within(a, 0.76, 0.04) && b >= 0.999,
        format!("Example 1 {a:.4} (need 0.76 +- 0.04); Gauss-linear {b:.4} (need >= 0.999)"),
    );
}

fn mean_and_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let (m, _) = common::mean_var(xs);
    (m, common::batch_means_se(xs, batches))
}

fn criterion_9(rep: &mut Report) {
    let p = gauss_linear_toy();
    let (m, c) = conjugate_posterior(&p.prior_mean, p.prior_cov.matrix(), &p.jacobian(&p.prior_mean).unwrap(), &p.obs, p.obs_cov.matrix()).unwrap();
    let (m, c) = (m[0], c[(0, 0)]);
    let h = hp(0.5);
    let s = OptSettings::default();
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let props: Vec<f64> = (0..100_000)
        .map(|_| propose(&p, &h, &s, &mut r, JacobianMode::Full).unwrap().x_star[0])
        .collect();
    let rec = run_chain_augmented(&p, &h, &s, 100_000, SEED, JacobianMode::Full).unwrap();
    let states: Vec<f64> = rec.xs().map(|x| x[0]).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, xs) in [("proposals", &props), ("chain", &states)] {
        let (mean, se_mean) = mean_and_se(xs, 100);
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
        let (var, se_var) = mean_and_se(&sq, 100);
        let zm = (mean - m) / se_mean;
        let zv = (var - c) / se_var;
        ok &= zm.abs() < 4.0 && zv.abs() < 4.0;
        parts.push(format!("{label} mean {mean:.4} ({zm:+.2} SE), var {var:.4} ({zv:+.2} SE)"));
    }
    rep.check("9", "Gauss-linear posterior moments", ok, format!("target N({m}, {c}); {}", parts.join("; ")));
}

fn criterion_10(rep: &mut Report) {
    let s = OptSettings::default();
    let mut worst_jac: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    for p in [example1(), example2(), example3_transformed(), gauss_linear_toy()] {
        let h = hp(0.5);
        let nx = p.dim_x();
        let mut r = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..100 {
            let (x, d) = p.draw_unconditional(&mut r);
            let analytic = jacobian_blocks(&p, &h, &x, &d, JacobianMode::Full).unwrap().assemble();
            let fd = fd_jacobian(
                |z| {
                    let (xu, du) = inverse_transform(&p, &h, &z.rows(0, nx).into_owned(), &z.rows(nx, z.len() - nx).into_owned()).unwrap();
                    stack(&xu, &du)
                },
                &stack(&x, &d),
            );
            worst_jac = worst_jac.max(rel_err(&fd, &analytic, 1e-12));
        }
        for _ in 0..1000 {
            let c = propose(&p, &h, &s, &mut r, JacobianMode::Full).unwrap();
            if !c.is_valid() {
                worst_trip = f64::INFINITY;
                continue;
            }
            let (xu, du) = inverse_transform(&p, &h, &c.x_star, &c.d_star).unwrap();
            worst_trip = worst_trip
                .max(rml_core::linalg::sup_norm(&(xu - &c.x_uc)))
                .max(rml_core::linalg::sup_norm(&(du - &c.d_uc)));
        }
    }
    let mut worst_det: f64 = 0.0;
    for (cx, cd, g, rho) in [(1.0, 1.0, 2.0, 0.5), (0.1, 0.01, -3.0, 0.65), (4.0, 0.3, 0.7, 0.05)] {
        let p = ProblemSpec::scalar_linear(0.0, cx, g, 0.0, cd).unwrap();
        let one = DVector::from_element(1, 0.3);
        let det = log_abs_det_jacobian(&jacobian_blocks(&p, &hp(rho), &one, &one, JacobianMode::Full).unwrap()).unwrap().exp();
        let expected = (1.0 / rho) * (1.0 + g * g * cx / cd);
        worst_det = worst_det.max((det - expected).abs() / expected);
    }
    rep.check(
        "10",
        "Numerical kernels",
        worst_jac <= 1e-4 && worst_trip <= 1e-6 && worst_det <= 1e-10,
        format!("Jacobian rel err {worst_jac:.2e} <= 1e-4; round trip {worst_trip:.2e} <= 1e-6; scalar det rel err {worst_det:.2e} <= 1e-10"),
    );
}

fn criterion_11(rep: &mut Report) {
    let p = example1();
    let run = || {
        let rec = run_chain_augmented(&p, &hp(0.65), &OptSettings::default(), 5_000, SEED, JacobianMode::Full).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&rec, &mut out).unwrap();
        out
    };
    let (a, b) = (run(), run());
    rep.check("11", "Determinism", a == b, format!("two 5000-step traces, {} bytes, identical: {}", a.len(), a == b));
}

fn main() {
    // libtest flags such as --nocapture may be passed through; none apply here
    let mut rep = Report { failures: 0 };
    let start = Instant::now();
    let sections: [(&str, fn(&mut Report)); 8] = [
        ("1-2", criteria_1_2),
        ("3", criterion_3),
        ("4-6", criteria_4_5_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
        ("10", criterion_10),
        ("11", criterion_11),
    ];
    for (_, f) in sections {
        f(&mut rep);
    }
    println!("{} of 11 criteria failed ({:.0} s)", rep.failures, start.elapsed().as_secs_f64());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && rep.failures > 0 {
        std::process::exit(1);
    }
}
