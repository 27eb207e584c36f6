//! Scenario runners that turn sampling, evolution, transport and moment
//! estimators into pass/fail reports.

mod bounds;
mod config;
mod invariance;
mod moments;
mod report;
mod transport;

pub use bounds::{verify_difference, verify_growth};
pub use config::{Scenario, TolerancePolicy, VerifyConfig};
pub use invariance::verify_invariance;
pub use moments::verify_moment_laws;
pub use report::{Check, Relation, Table, VerifyReport, REPORT_SCHEMA};
pub use transport::{verify_continuity, verify_stability, PerturbationRow};

use crate::error::Result;
use crate::random_fields::substream_seed;

/// Runs the scenario named in `config`.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    match config.scenario {
        Scenario::Growth => verify_growth(config),
        Scenario::Difference => verify_difference(config),
        Scenario::Continuity => verify_continuity(config),
        Scenario::Stability => verify_stability(config),
        Scenario::Invariance => verify_invariance(config),
        Scenario::Moments => verify_moment_laws(config),
    }
}

/// Seed of an auxiliary ensemble derived from the run seed.
///
/// Auxiliary streams live at the top of the index range so they never
/// coincide with the per-sample substreams of the main ensemble.
pub(crate) fn aux_seed(seed: u64, tag: u64) -> u64 {
    substream_seed(seed, u64::MAX - tag)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario) -> VerifyConfig {
        VerifyConfig {
            modes: 8,
            count: 24,
            holdout: 8,
            t: 0.3,
            dt: 1e-2,
            scalar_count: 4000,
            null_replicates: 2,
            ..VerifyConfig::for_scenario(scenario)
        }
    }

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
            let json = serde_json::to_string(&sc).unwrap();
            assert_eq!(json, format!("\"{}\"", sc.name()));
        }
        assert!("growths".parse::<Scenario>().is_err());
    }

    #[test]
    fn exponent_relation_enforced() {
        let mut cfg = small(Scenario::Continuity);
        cfg.p2 = 3.0;
        assert!(cfg.validate().is_err());
        cfg.p = 12.0 / 7.0;
        cfg.validate().unwrap();
    }

    #[test]
    fn admissible_ranges_enforced() {
        let mut cfg = small(Scenario::Stability);
        cfg.sigma = 0.61;
        assert!(cfg.validate().is_err(), "above 3s/2");
        cfg.s = 0.3;
        cfg.sigma = 0.55;
        assert!(cfg.validate().is_err());
        let mut cfg = small(Scenario::Continuity);
        cfg.s = 0.25;
        assert!(cfg.validate().is_err());
        cfg.s = 0.3;
        cfg.sigma = 0.59;
        cfg.validate().unwrap();
    }

    #[test]
    fn reports_are_reproducible() {
        for sc in Scenario::ALL {
            let cfg = small(sc);
            let a = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
            let b = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
            assert_eq!(a, b, "{}", sc.name());
        }
    }

    #[test]
    fn pass_is_conjunction_of_checks() {
        for sc in Scenario::ALL {
            let r = run(&small(sc)).unwrap();
            assert!(!r.checks.is_empty());
            assert_eq!(r.pass, r.checks.iter().all(|c| c.pass));
            assert_eq!(r.schema, REPORT_SCHEMA);
            assert_eq!(r.config, small(sc));
        }
    }

    #[test]
    fn stability_pipeline_reproduces_continuity() {
        let cont = small(Scenario::Continuity);
        let stab = VerifyConfig {
            scenario: Scenario::Stability,
            reference_seed: Some(cont.seed),
            evolve_reference: true,
            ..cont.clone()
        };
        let a = transport::sweep_rows(&cont).unwrap();
        let b = transport::sweep_rows(&stab).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_perturbation_has_zero_distance() {
        let cfg = VerifyConfig {
            v_grid: vec![0.0, 0.1, 0.2],
            ..small(Scenario::Continuity)
        };
        let rows = transport::sweep_rows(&cfg).unwrap();
        assert_eq!((rows[0].d0, rows[0].dt), (0.0, 0.0));
        assert_eq!(rows[0].ratio(), None);
        let r = run(&cfg).unwrap();
        assert!(r.find_check("dt_at_zero_perturbation").unwrap().pass);
    }

    #[test]
    fn all_zero_grid_is_rejected() {
        let cfg = VerifyConfig {
            v_grid: vec![0.0],
            ..small(Scenario::Continuity)
        };
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn growth_calibration_is_tight_on_training() {
        let r = run(&small(Scenario::Growth)).unwrap();
        assert!(r.find_check("training_violations").unwrap().pass);
        let below = r.quantities["training_violations_one_step_below"];
        assert!(below >= 1.0);
    }

    #[test]
    fn tiny_grid_reports_calibration_failure() {
        let mut cfg = small(Scenario::Difference);
        cfg.grid.max = cfg.grid.min;
        let r = run(&cfg).unwrap();
        assert!(!r.pass);
        assert!(!r.find_check("calibrated_c_within_grid").unwrap().pass);
    }

    #[test]
    fn mismatched_scenario_rejected() {
        let cfg = small(Scenario::Growth);
        assert!(verify_continuity(&cfg).is_err());
        assert!(verify_stability(&cfg).is_err());
    }
}
