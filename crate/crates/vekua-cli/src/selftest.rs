//! Built-in reduced-scale checks: a fast standalone sanity pass over the
//! same ground the full test suite covers.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde_json::{json, Value};

use vekua::conditions::{chord_length, find_resonances, global_constants, phase_distance};
use vekua::field::{apply_operator, solve_field, CoefficientField, PairedField, Profile};
use vekua::group::{spectrum, FactorIndex, GroupFactor, GroupModel, ModeIndex, ModeScalars};
use vekua::mode::{build_mode_system, oracle_shooting, relative_deviation, solve_mode, VekuaParams};
use vekua::profile::{FourierPoly, TrigPoly};

use crate::config::EffectiveConfig;
use crate::report::{emit, envelope};
use crate::CliError;

/// Deterministic xorshift stream so the selftest never depends on ambient
/// randomness.
struct Stream(u64);

impl Stream {
    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn c64(&mut self) -> Complex64 {
        Complex64::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0))
    }
}

struct Check {
    name: &'static str,
    pass: bool,
    evidence: String,
}

fn check_round_trip() -> Check {
    let model = GroupModel::new(vec![GroupFactor::Circle], vec![0.0], vec![0.4]).unwrap();
    let params = VekuaParams::new(
        model.clone(),
        0.5,
        Complex64::new(1.0, 0.0),
        TrigPoly::new(1.0, &[]).unwrap(),
        TrigPoly::new(1.0, &[(1, 0.3, 0.0)]).unwrap(),
    )
    .unwrap();
    let bounds = vec![2u32];
    let n_t = 64;
    let mut stream = Stream(0x5eed_0001);
    let mut primal = CoefficientField::new(model.clone(), bounds.clone(), n_t).unwrap();
    for mode in vekua::group::enumerate_modes(&model, &bounds).unwrap() {
        let coeffs: Vec<(i64, Complex64)> = (-3..=3).map(|n| (n, stream.c64())).collect();
        primal.insert(mode, Profile::Poly(FourierPoly::from_coeffs(&coeffs))).unwrap();
    }
    let truth = PairedField::from_primal(primal).unwrap();
    let forcing = match apply_operator(&params, &truth) {
        Ok(f) => f,
        Err(e) => return Check { name: "round-trip", pass: false, evidence: e.to_string() },
    };
    let report = match solve_field(&params, &forcing) {
        Ok(r) => r,
        Err(e) => return Check { name: "round-trip", pass: false, evidence: e.to_string() },
    };
    let mut worst: f64 = 0.0;
    for (mode, profile) in truth.primal.entries() {
        let expect = profile.sample(n_t);
        let got = report
            .solution
            .primal
            .get(mode)
            .map(|p| p.sample(n_t))
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n_t + 1]);
        for (x, y) in expect.iter().zip(&got) {
            worst = worst.max((x - y).norm());
        }
    }
    Check {
        name: "round-trip",
        pass: worst <= 1e-7,
        evidence: format!("max deviation {worst:.3e} over 5 modes, tol 1e-7"),
    }
}

fn check_oracle_agreement() -> Check {
    let model = GroupModel::new(vec![GroupFactor::Circle], vec![0.3], vec![0.3]).unwrap();
    let mut stream = Stream(0x5eed_0002);
    let mut worst: f64 = 0.0;
    let mut tested = 0usize;
    for attempt in 0..200usize {
        if tested == 5 {
            break;
        }
        let delta = stream.uniform(-1.0, 1.0);
        let alpha = Complex64::from_polar(stream.uniform(0.4, 1.0), stream.uniform(0.0, 6.28));
        let params = VekuaParams::new(
            model.clone(),
            delta,
            alpha,
            TrigPoly::new(stream.uniform(-0.2, 0.2), &[(1, 0.1, 0.05)]).unwrap(),
            TrigPoly::new(stream.uniform(0.4, 0.8), &[(1, 0.1, 0.0)]).unwrap(),
        )
        .unwrap();
        let k = 1 + (attempt as i64 % 3);
        let mode = ModeIndex::new(vec![FactorIndex::Circle { k }]);
        let scalars = vekua::group::mode_scalars(&model, &mode).unwrap();
        let system = match build_mode_system(&params, &scalars) {
            Ok(s) => s,
            Err(_) => continue,
        };
        // Keep the growth mild enough that fourth-order shooting retains
        // its full accuracy.
        if system.d1.norm() < 1e-3 || system.d2.norm() < 1e-3 || system.rho.re > 1.2 {
            continue;
        }
        let f1 = |t: f64| Complex64::new(1.0, 0.0) + 0.5 * Complex64::new(0.0, t).exp();
        let f2 = |t: f64| Complex64::new(0.25, -0.1) * Complex64::new(0.0, -t).exp();
        let ti = system.t_inv;
        let closed = solve_mode(
            &system,
            |t| ti.0[0][0] * f1(t) + ti.0[0][1] * f2(t),
            |t| ti.0[1][0] * f1(t) + ti.0[1][1] * f2(t),
            |t| params.big_q_at(t),
            |t| params.big_s_at(t),
            256,
        )
        .unwrap();
        let shooting = oracle_shooting(&params, &scalars, f1, f2, 256, 16).unwrap();
        worst = worst.max(relative_deviation(
            &closed.w1, &closed.w2, &shooting.w1, &shooting.w2,
        ));
        tested += 1;
    }
    Check {
        name: "oracle-agreement",
        pass: tested == 5 && worst <= 1e-6,
        evidence: format!(
            "max relative deviation {worst:.3e} over {tested} systems, tol 1e-6"
        ),
    }
}

fn check_resonance_witness() -> Check {
    let model = GroupModel::new(vec![GroupFactor::Circle], vec![0.0], vec![0.0]).unwrap();
    let params = VekuaParams::new(
        model.clone(),
        SQRT_2,
        Complex64::new(1.0, 0.0),
        TrigPoly::new(0.0, &[]).unwrap(),
        TrigPoly::new(1.0, &[]).unwrap(),
    )
    .unwrap();
    let constants = global_constants(&params);
    let spec = spectrum(&model, &[3]).unwrap();
    let scalars: Vec<ModeScalars> = spec.iter().map(|(_, sc)| *sc).collect();
    let hits = find_resonances(&constants, &scalars, 5);
    let ks: std::collections::BTreeSet<i64> = hits.iter().map(|h| h.k).collect();
    let expected = std::collections::BTreeSet::from([-1i64, 1]);
    // The mode solve must refuse this operator: its boundary denominator
    // is exactly zero.
    let d2 = match build_mode_system(&params, &scalars[0]) {
        Err(vekua::Error::ResonantMode { d2_abs, .. }) => d2_abs,
        Err(_) => f64::INFINITY,
        Ok(system) => system.d2.norm(),
    };
    let pass = ks == expected && d2 <= 1e-10;
    Check {
        name: "resonance-witness",
        pass,
        evidence: format!("hits at k = {ks:?} (expect {{-1, 1}}), |D2| = {d2:.3e}"),
    }
}

fn check_chord_identity() -> Check {
    let mut worst: f64 = 0.0;
    let mut comparability = true;
    for i in 0..200 {
        let theta = -40.0 + 80.0 * (i as f64 + 0.5) / 200.0;
        let chord = chord_length(theta);
        let d = phase_distance(theta);
        worst = worst.max((chord * chord - 2.0 * (1.0 - theta.cos())).abs());
        comparability &= chord <= d + 1e-12;
        comparability &= chord + 1e-12 >= d * std::f64::consts::FRAC_2_PI;
    }
    Check {
        name: "chord-identity",
        pass: worst <= 1e-12 && comparability,
        evidence: format!("identity residual {worst:.3e} over 200 phases, tol 1e-12"),
    }
}

fn check_conjugation_involution() -> Check {
    let model =
        GroupModel::new(vec![GroupFactor::Circle, GroupFactor::Su2], vec![0.0, 0.0], vec![
            0.2, 0.5,
        ])
        .unwrap();
    let bounds = vec![2u32, 2];
    let n_t = 32;
    let mut stream = Stream(0x5eed_0003);
    let mut field = CoefficientField::new(model.clone(), bounds.clone(), n_t).unwrap();
    for mode in vekua::group::enumerate_modes(&model, &bounds).unwrap() {
        let coeffs: Vec<(i64, Complex64)> = (-2..=2).map(|n| (n, stream.c64())).collect();
        field.insert(mode, Profile::Poly(FourierPoly::from_coeffs(&coeffs))).unwrap();
    }
    let once = match vekua::field::conjugate_field(&field) {
        Ok(f) => f,
        Err(e) => {
            return Check {
                name: "conjugation-involution",
                pass: false,
                evidence: e.to_string(),
            }
        }
    };
    let twice = match vekua::field::conjugate_field(&once) {
        Ok(f) => f,
        Err(e) => {
            return Check {
                name: "conjugation-involution",
                pass: false,
                evidence: e.to_string(),
            }
        }
    };
    let mut worst: f64 = 0.0;
    for (mode, profile) in field.entries() {
        let back = twice.get(mode).expect("involution preserves the mode set");
        for (x, y) in profile.sample(n_t).iter().zip(back.sample(n_t)) {
            worst = worst.max((x - y).norm());
        }
    }
    Check {
        name: "conjugation-involution",
        pass: worst <= 1e-12,
        evidence: format!("max deviation {worst:.3e} over {} modes", field.len()),
    }
}

/// Run the reduced checks; the config is parsed and validated but the checks
/// themselves run on fixed small instances so the pass is comparable across
/// machines and configs.
pub fn run_selftest(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    eff.params()?;
    let checks = vec![
        check_round_trip(),
        check_oracle_agreement(),
        check_resonance_witness(),
        check_chord_identity(),
        check_conjugation_involution(),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "pass": c.pass,
                "evidence": c.evidence,
            })
        })
        .collect();
    let result = json!({
        "checks": rows,
        "passed": checks.iter().filter(|c| c.pass).count(),
        "total": checks.len(),
        "all_pass": all_pass,
    });
    let env = envelope("selftest", config_path, eff, result)?;
    emit(&env, eff)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::SelftestFailed)
    }
}
