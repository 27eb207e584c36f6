//! Acceptance suite: one line per criterion, nonzero exit if any is red.
//!
//! Run alone with `cargo test -p bbmflow-cli --test acceptance`.

use std::error::Error;
use std::path::Path;
use std::time::{Duration, Instant};

use bbmflow_cli::ensemble_file::{decode, encode};
use bbmflow_cli::{read_ensemble, write_ensemble, CliError};
use bbmflow_core::dynamics::{conserved_quantities, evolve, EvolveParams};
use bbmflow_core::random_fields::{sample_gaussian, Ensemble, MeasureSpec};
use bbmflow_core::spectral::{project_low, sobolev_norm, SobolevIndex, SpectralField};
use bbmflow_core::transport::{
    brute_force_ot, cost_matrix, exact_ot, sinkhorn_ot, synchronized_bound, CostMatrix,
};
use bbmflow_core::verification::{self, Scenario, VerifyConfig, VerifyReport};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn Error>>;

/// L1 marginal residual at which Sinkhorn stops; the plan is rounded afterwards.
const SINKHORN_TOL: f64 = 1e-6;
/// Regularization, relative to the median cost, for the ordering-chain instances.
const ORDERING_EPSILON: f64 = 0.05;

fn gaussian(modes: usize, seed: u64, count: usize) -> Result<Ensemble, Box<dyn Error>> {
    Ok(sample_gaussian(&MeasureSpec::gaussian(modes), seed, count)?)
}

fn l2(u: &SpectralField) -> f64 {
    sobolev_norm(u, SobolevIndex::L2)
}

fn linear_flow_oracle() -> Outcome {
    let start = Instant::now();
    let u0 = gaussian(64, 1, 1)?.into_samples().remove(0);
    let t = 1.0;
    let u = evolve(&u0, t, &EvolveParams::new(1e-3, 64).linear())?;
    let (mut amp, mut phase) = (0.0f64, 0.0f64);
    for (n, (c0, ct)) in u0.coeffs().iter().zip(u.coeffs()).enumerate() {
        let nf = n as f64;
        let want = c0 * Complex64::from_polar(1.0, -nf * t / (1.0 + nf * nf));
        amp = amp.max((ct.norm() - want.norm()).abs());
        phase = phase.max((ct / want).arg().abs());
    }
    let secs = start.elapsed();
    Ok((
        amp < 1e-10 && phase < 1e-9 && secs < Duration::from_secs(1),
        format!("amplitude err {amp:.2e}, phase err {phase:.2e}, {secs:.2?}"),
    ))
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let params = EvolveParams::new(1e-3, 64);
    let (mut mean_drift, mut energy_drift) = (0.0f64, 0.0f64);
    for u0 in gaussian(64, 2, 16)?.into_samples() {
        let c0 = conserved_quantities(&u0);
        let mut u = u0;
        for _ in 0..10 {
            u = evolve(&u, 1.0, &params)?;
            let c = conserved_quantities(&u);
            mean_drift = mean_drift.max((c.mean - c0.mean).abs());
            energy_drift = energy_drift.max((c.h1_energy - c0.h1_energy).abs() / c0.h1_energy);
        }
    }
    let secs = start.elapsed();
    Ok((
        mean_drift <= f64::EPSILON && energy_drift < 1e-8 && secs < Duration::from_secs(30),
        format!("mean drift {mean_drift:.1e}, relative H1 drift {energy_drift:.2e}, {secs:.2?}"),
    ))
}

fn integrator_order() -> Outcome {
    let u0 = gaussian(32, 3, 1)?.into_samples().remove(0);
    let (t, dt) = (2.0, 0.1);
    let at = |h: f64| evolve(&u0, t, &EvolveParams::new(h, 32));
    let reference = at(dt / 8.0)?;
    let e1 = l2(&(&at(dt)? - &reference));
    let e2 = l2(&(&at(dt / 2.0)? - &reference));
    let ratio = e1 / e2;
    Ok((
        (12.0..=20.0).contains(&ratio),
        format!("error ratio {ratio:.2} (dt {dt}, t {t}, N 32)"),
    ))
}

fn projection_tail() -> Outcome {
    // half Gaussian samples, half fields with uniform coefficients on every mode
    let mut fields = gaussian(64, 4, 500)?.into_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let mut coeffs: Vec<Complex64> = (0..=64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        coeffs[0].im = 0.0;
        fields.push(SpectralField::new(coeffs)?);
    }
    let mut violations = 0;
    let mut checks = 0;
    for n in [4usize, 8, 16, 32] {
        for s in [0.3, 0.5, 0.8] {
            let idx = SobolevIndex::new(s)?;
            for u in &fields {
                checks += 1;
                let tail = l2(&(u - &project_low(u, n)));
                if tail > (n as f64).powf(-s) * sobolev_norm(u, idx) {
                    violations += 1;
                }
            }
        }
    }
    Ok((violations == 0, format!("{violations} violations in {checks} checks")))
}

fn random_costs(n: usize, rng: &mut ChaCha8Rng) -> Result<CostMatrix, Box<dyn Error>> {
    let entries = (0..n * n).map(|_| rng.random_range(0.0..10.0)).collect();
    Ok(CostMatrix::from_entries(n, entries, 0.0, 1.0)?)
}

fn ot_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for k in 0..200 {
        let c = random_costs(1 + k % 6, &mut rng)?;
        if brute_force_ot(&c)? != exact_ot(&c).value {
            mismatches += 1;
        }
    }

    let s = SobolevIndex::new(0.4)?;
    let d = |a: &Ensemble, b: &Ensemble| -> Result<f64, Box<dyn Error>> {
        Ok(exact_ot(&cost_matrix(a, b, s, 2.0)?).value)
    };
    let (mut axiom_failures, mut order_failures) = (0, 0);
    for k in 0..50u64 {
        let a = gaussian(16, 1000 + 3 * k, 16)?;
        let b = gaussian(16, 1001 + 3 * k, 16)?;
        let c = gaussian(16, 1002 + 3 * k, 16)?;
        let (ab, ba, bc, ac, aa) = (d(&a, &b)?, d(&b, &a)?, d(&b, &c)?, d(&a, &c)?, d(&a, &a)?);
        let ok = (ab - ba).abs() <= 1e-9 && aa <= 1e-9 && ab > 1e-9 && ac <= ab + bc + 1e-9;
        axiom_failures += usize::from(!ok);

        let costs = cost_matrix(&a, &b, s, 2.0)?;
        let sk = sinkhorn_ot(&costs, ORDERING_EPSILON * costs.median(), SINKHORN_TOL)?.value;
        let sync = synchronized_bound(&a, &b, s, 2.0)?.value;
        order_failures += usize::from(!(ab <= sk && sk <= sync));
    }

    let a = gaussian(16, 7, 64)?;
    let b = gaussian(16, 8, 64)?;
    let costs = cost_matrix(&a, &b, SobolevIndex::L2, 2.0)?;
    let exact = exact_ot(&costs).value;
    let sk = sinkhorn_ot(&costs, 0.01 * costs.median(), SINKHORN_TOL)?.value;
    let rel = (sk - exact) / exact;
    Ok((
        mismatches == 0 && axiom_failures == 0 && order_failures == 0 && rel <= 0.05,
        format!(
            "brute/exact mismatches {mismatches}/200, axiom failures {axiom_failures}/50, \
             ordering failures {order_failures}/50, sinkhorn gap {:.2}% at n=64",
            100.0 * rel
        ),
    ))
}

fn checks_pass(report: &VerifyReport, names: &[&str]) -> Result<bool, Box<dyn Error>> {
    names.iter().try_fold(true, |acc, name| {
        let c = report
            .find_check(name)
            .ok_or_else(|| format!("report lacks check '{name}'"))?;
        Ok(acc && c.pass)
    })
}

fn value(report: &VerifyReport, name: &str) -> f64 {
    report.find_check(name).map_or(f64::NAN, |c| c.value)
}

fn difference_bound() -> Outcome {
    let cfg = VerifyConfig {
        count: 256,
        holdout: 256,
        t: 1.0,
        modes: 32,
        epsilons: vec![1e-2, 5e-3],
        ..VerifyConfig::for_scenario(Scenario::Difference)
    };
    let r = verification::run(&cfg)?;
    let names = ["lipschitz_ratio_spread", "training_violations", "holdout_violations"];
    Ok((
        r.pass && checks_pass(&r, &names)?,
        format!(
            "ratio spread {:.2e}, held-out violations {}/256, C = {:.4}",
            value(&r, names[0]),
            value(&r, names[2]),
            r.calibrated.map_or(f64::NAN, |b| b.big_c)
        ),
    ))
}

fn growth_bound() -> Outcome {
    let cfg = VerifyConfig {
        count: 256,
        holdout: 256,
        horizons: vec![1.0, 2.0, 5.0],
        ..VerifyConfig::for_scenario(Scenario::Growth)
    };
    let r = verification::run(&cfg)?;
    Ok((
        r.pass && checks_pass(&r, &["training_violations", "holdout_violations"])?,
        format!(
            "held-out violations {}/768, worst ratio {:.3}, C = {:.4}",
            value(&r, "holdout_violations"),
            r.quantities.get("holdout_worst_ratio").copied().unwrap_or(f64::NAN),
            r.calibrated.map_or(f64::NAN, |b| b.big_c)
        ),
    ))
}

fn invariance() -> Outcome {
    let start = Instant::now();
    let cfg = VerifyConfig::for_scenario(Scenario::Invariance);
    let r = verification::run(&cfg)?;
    let secs = start.elapsed();
    let names = ["l2_squared_drift_in_se", "h_quarter_fourth_drift_in_se", "cubic_integral_drift_in_se"];
    let drifts: Vec<String> = names.iter().map(|n| format!("{:.2}", value(&r, n))).collect();
    Ok((
        checks_pass(&r, &names)? && secs < Duration::from_secs(600),
        format!("drifts in SE [{}], {secs:.1?}", drifts.join(", ")),
    ))
}

fn continuity() -> Outcome {
    let r = verification::run(&VerifyConfig::for_scenario(Scenario::Continuity))?;
    Ok((
        checks_pass(&r, &["ratio_spread", "dt_small_over_large"])?,
        format!(
            "ratio spread {:.3}, Dt(0.05)/Dt(0.2) {:.3}",
            value(&r, "ratio_spread"),
            value(&r, "dt_small_over_large")
        ),
    ))
}

fn stability() -> Outcome {
    let cfg = VerifyConfig::for_scenario(Scenario::Stability);
    let r = verification::run(&cfg)?;
    Ok((
        checks_pass(&r, &["ratio_spread", "null_gap_in_se"])?,
        format!(
            "sigma {}, ratio spread {:.3}, null gap {:.2} SE over {} replicates",
            cfg.sigma,
            value(&r, "ratio_spread"),
            value(&r, "null_gap_in_se"),
            cfg.null_replicates
        ),
    ))
}

fn moment_laws() -> Outcome {
    let r = verification::run(&VerifyConfig::for_scenario(Scenario::Moments))?;
    let names = ["gaussian_sqrt_p_slope", "lognormal_sqrt_p_slope", "lognormal_log_c_error"];
    Ok((
        checks_pass(&r, &names)?,
        format!(
            "gaussian slope {:.3}, lognormal slope {:.3}, |ln C - 0.5| {:.4}",
            value(&r, names[0]),
            value(&r, names[1]),
            value(&r, names[2])
        ),
    ))
}

fn serialization() -> Outcome {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("e.bbme");
    let e = sample_gaussian(&MeasureSpec::perturbed(16, 0.3), 12, 40)?;
    write_ensemble(&e, &path)?;
    let back = read_ensemble(&path)?;
    let bitwise = back == e && std::fs::read(&path)? == encode(&back);

    let bytes = encode(&e);
    let truncated = decode(&bytes[..bytes.len() - 1]).err();
    let mut bad = bytes.clone();
    bad[0] = b'[';
    let bad_header = decode(&bad).err();
    let code = |err: &Option<CliError>| err.as_ref().map(CliError::exit_code);
    let distinct = matches!(truncated, Some(CliError::TruncatedBody { .. }))
        && matches!(bad_header, Some(CliError::MalformedHeader(_)))
        && code(&truncated) != code(&bad_header);
    let missing = read_ensemble(Path::new("/nonexistent/e.bbme")).is_err();
    Ok((
        bitwise && distinct && missing,
        format!(
            "round trip bitwise {bitwise}, truncated exit {:?}, bad header exit {:?}",
            code(&truncated).unwrap_or(0),
            code(&bad_header).unwrap_or(0)
        ),
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("linear flow oracle", linear_flow_oracle),
        ("conservation", conservation),
        ("integrator order", integrator_order),
        ("projection tail bound", projection_tail),
        ("OT correctness", ot_correctness),
        ("Lipschitz scaling and difference bound", difference_bound),
        ("growth bound", growth_bound),
        ("measure invariance", invariance),
        ("continuity property", continuity),
        ("stability property", stability),
        ("moment laws", moment_laws),
        ("serialization", serialization),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {detail} [{:.1?}]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
