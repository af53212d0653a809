//! Task implementations behind the subcommands.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use serde_json::{json, Value};

use vekua::conditions::{
    classify_lambda0, dc_prime_equivalence, diophantine_check, find_resonances,
    global_constants, DioVariant, DioVerdict, DiophantineReport, GlobalConstants,
    Lambda0Case,
};
use vekua::field::{solve_field, DecayDiagnostic};
use vekua::group::{spectrum, ModeIndex, ModeScalars};
use vekua::mode::{build_mode_system, oracle_shooting, relative_deviation, solve_mode};
use vekua::Error;

use crate::config::{EffectiveConfig, FactorIndexSpec};
use crate::report::{emit, envelope, fmt_c, output_prefix, write_artifact};
use crate::CliError;

fn c64_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn mode_json(mode: &ModeIndex) -> Value {
    let specs: Vec<FactorIndexSpec> =
        mode.entries().iter().map(FactorIndexSpec::from_lib).collect();
    serde_json::to_value(specs).expect("mode index serialization")
}

fn constants_json(constants: &GlobalConstants) -> Value {
    json!({
        "a0": c64_json(constants.a0),
        "b0": c64_json(constants.b0),
        "s0": constants.s0,
        "q0": constants.q0,
        "gap": constants.gap(),
    })
}

fn dio_json(report: &DiophantineReport) -> Value {
    let variant = match report.variant {
        DioVariant::PhaseGap => "phase-gap",
        DioVariant::PhaseGapPrime => "phase-gap-prime",
        DioVariant::Denominators => "denominators",
    };
    let verdict = match &report.verdict {
        DioVerdict::HoldsUpToTruncation => json!({ "status": "holds-up-to-truncation" }),
        DioVerdict::Violated { witness, weight, value, bound } => json!({
            "status": "violated",
            "witness": mode_json(witness),
            "weight": weight,
            "value": value,
            "bound": bound,
        }),
    };
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| json!({ "weight": r.weight, "min_d1": r.min_d1, "min_d2": r.min_d2 }))
        .collect();
    json!({
        "variant": variant,
        "m": report.m,
        "threshold": report.threshold,
        "max_weight": report.max_weight,
        "holds": report.verdict.holds(),
        "certified": report.certified,
        "m_hat": report.m_hat,
        "verdict": verdict,
        "rows": rows,
    })
}

fn decay_json(decay: &DecayDiagnostic) -> Value {
    let slopes: Vec<Value> = decay
        .slopes
        .iter()
        .map(|s| {
            json!({
                "order": s.order,
                "slope": s.slope,
                "smooth_compatible": s.smooth_compatible,
            })
        })
        .collect();
    let rows: Vec<Value> = decay
        .rows
        .iter()
        .map(|r| json!({ "weight": r.weight, "sup": r.sup }))
        .collect();
    json!({ "orders": decay.orders, "slopes": slopes, "rows": rows })
}

/// `<prefix>.decay.csv`: one row per weight bin and derivative order.
fn decay_csv(decay: &DecayDiagnostic) -> String {
    let mut out = String::from("weight,beta,supnorm\n");
    for row in &decay.rows {
        for (j, &order) in decay.orders.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:e}", row.weight, order, row.sup[j]);
        }
    }
    out
}

pub fn run_solve(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    let params = eff.params()?;
    let forcing = eff.forcing(params.group())?;
    let report = solve_field(&params, &forcing).map_err(CliError::Lib)?;

    let min_d1 = report.mode_diags.iter().map(|d| d.d1_abs).fold(f64::INFINITY, f64::min);
    let min_d2 = report.mode_diags.iter().map(|d| d.d2_abs).fold(f64::INFINITY, f64::min);
    let mut result = json!({
        "modes": report.solution.primal.len(),
        "forcing_modes": forcing.primal.len(),
        "residual_max": report.residual_max,
        "residual_l2": report.residual_l2,
        "max_exp_re": report.max_exp_re,
        "min_d1_abs": min_d1,
        "min_d2_abs": min_d2,
        "decay": decay_json(&report.decay),
    });

    if let Some(prefix) = output_prefix(eff) {
        let solution_path = PathBuf::from(format!("{}.solution.json", prefix.display()));
        let csv_path = PathBuf::from(format!("{}.decay.csv", prefix.display()));
        let n_t = report.solution.primal.n_t();
        let model = report.solution.primal.model();
        let modes: Vec<Value> = report
            .solution
            .primal
            .entries()
            .map(|(mode, profile)| {
                let (conj_mode, _) = vekua::group::conjugate_mode(model, mode)
                    .expect("solution modes are admissible");
                let primal: Vec<[f64; 2]> =
                    profile.sample(n_t).iter().map(|z| [z.re, z.im]).collect();
                let conj: Vec<[f64; 2]> = report
                    .solution
                    .conj
                    .get(&conj_mode)
                    .map(|p| p.sample(n_t).iter().map(|z| [z.re, z.im]).collect())
                    .unwrap_or_default();
                json!({
                    "index": mode_json(mode),
                    "primal_samples": primal,
                    "conj_samples": conj,
                })
            })
            .collect();
        let solution = json!({ "n_t": n_t, "modes": modes });
        let text = serde_json::to_string_pretty(&solution)
            .map_err(|e| CliError::Config(format!("solution serialization: {e}")))?;
        write_artifact(&solution_path, &format!("{text}\n"))?;
        write_artifact(&csv_path, &decay_csv(&report.decay))?;
        result["artifacts"] = json!({
            "solution": solution_path.display().to_string(),
            "decay_csv": csv_path.display().to_string(),
        });
    }

    let env = envelope("solve", config_path, eff, result)?;
    emit(&env, eff)
}

pub fn run_classify(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    let params = eff.params()?;
    let spec = spectrum(params.group(), &eff.config.truncation.bounds).map_err(CliError::Lib)?;
    let k_bound = eff.config.resonances.as_ref().map_or(50, |r| r.k_bound);
    let verdict = classify_lambda0(&params, &spec, k_bound).map_err(CliError::Lib)?;

    let case = match verdict.case {
        Lambda0Case::Case1 => 1,
        Lambda0Case::Case2 => 2,
        Lambda0Case::Case3 => 3,
        Lambda0Case::Case4 => 4,
    };
    let hits: Vec<Value> = verdict
        .hits
        .iter()
        .map(|h| json!({ "a": h.a, "b": h.b, "k": h.k, "r1": h.r1, "r2": h.r2 }))
        .collect();
    let summary = format!(
        "case {case}: {}",
        if verdict.solvable { "solvable" } else { "not solvable" }
    );
    let result = json!({
        "case": case,
        "solvable": verdict.solvable,
        "summary": summary,
        "constants": constants_json(&verdict.constants),
        "k_bound": k_bound,
        "resonance_hits": hits,
        "phase_gap": verdict.dc.as_ref().map(dio_json),
    });
    let env = envelope("classify", config_path, eff, result)?;
    emit(&env, eff)
}

pub fn run_resonances(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    let params = eff.params()?;
    let spec = spectrum(params.group(), &eff.config.truncation.bounds).map_err(CliError::Lib)?;
    let k_bound = eff.config.resonances.as_ref().map_or(50, |r| r.k_bound);
    let constants = global_constants(&params);
    let scalars: Vec<ModeScalars> = spec.iter().map(|(_, sc)| *sc).collect();
    let classes: BTreeSet<(u64, u64)> =
        scalars.iter().map(|sc| (sc.a.to_bits(), sc.b.to_bits())).collect();
    let hits = find_resonances(&constants, &scalars, k_bound);

    let hit_rows: Vec<Value> = hits
        .iter()
        .map(|h| json!({ "a": h.a, "b": h.b, "k": h.k, "r1": h.r1, "r2": h.r2 }))
        .collect();
    let result = json!({
        "k_bound": k_bound,
        "modes": spec.len(),
        "classes": classes.len(),
        "constants": constants_json(&constants),
        "hit_count": hits.len(),
        "hits": hit_rows,
    });
    let env = envelope("resonances", config_path, eff, result)?;
    emit(&env, eff)
}

pub fn run_diophantine(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    let params = eff.params()?;
    let spec = spectrum(params.group(), &eff.config.truncation.bounds).map_err(CliError::Lib)?;
    let m = eff.config.diophantine.as_ref().map_or(2.0, |d| d.m);

    let denominators =
        diophantine_check(&params, &spec, DioVariant::Denominators, m).map_err(CliError::Lib)?;
    let mut result = json!({
        "m": m,
        "modes": spec.len(),
        "denominators": dio_json(&denominators),
    });

    // The phase variants need |alpha| < |delta| and s0 = 0; probe once and
    // report inapplicability instead of failing the run.
    match dc_prime_equivalence(&params, &spec, m) {
        Ok(eq) => {
            result["phase_applicable"] = json!(true);
            result["phase_gap"] = dio_json(&eq.dc);
            result["phase_gap_prime"] = dio_json(&eq.dc_prime);
            result["equivalence"] = json!({
                "verdicts_agree": eq.dc.verdict.holds() == eq.dc_prime.verdict.holds(),
                "identity_residual_max": eq.identity_residual_max,
                "lower_margin_min": eq.lower_margin_min,
                "upper_margin_min": eq.upper_margin_min,
            });
        }
        Err(Error::InvalidInput(reason)) => {
            result["phase_applicable"] = json!(false);
            result["phase_skip_reason"] = json!(reason);
        }
        Err(e) => return Err(CliError::Lib(e)),
    }

    let env = envelope("diophantine", config_path, eff, result)?;
    emit(&env, eff)
}

pub fn run_oracle(config_path: &str, eff: &EffectiveConfig) -> Result<(), CliError> {
    let params = eff.params()?;
    let spec = spectrum(params.group(), &eff.config.truncation.bounds).map_err(CliError::Lib)?;
    let oracle_cfg = eff.config.oracle.clone().unwrap_or_default();

    // One representative per scalar class (a, b); the mode solve only sees
    // the scalars, so duplicates add nothing.
    let mut seen = BTreeSet::new();
    let mut classes: Vec<ModeScalars> = Vec::new();
    for (_, sc) in &spec {
        if seen.insert((sc.a.to_bits(), sc.b.to_bits())) {
            classes.push(*sc);
        }
    }
    classes.sort_by(|x, y| {
        (x.b, x.a).partial_cmp(&(y.b, y.a)).expect("finite scalars")
    });
    classes.truncate(oracle_cfg.max_classes);
    if classes.is_empty() {
        return Err(CliError::Config("truncation produced an empty spectrum".into()));
    }

    // Fixed probe forcing, chosen smooth and mean-free of symmetry so both
    // components are exercised.
    let f1 = |t: f64| Complex64::new(1.0, 0.0) + 0.5 * Complex64::new(0.0, t).exp();
    let f2 = |_: f64| Complex64::new(0.25, 0.0);

    let mut rows: Vec<Value> = Vec::new();
    let mut worst: Option<(f64, ModeScalars)> = None;
    for sc in &classes {
        let system = build_mode_system(&params, sc).map_err(CliError::Lib)?;
        let ti = system.t_inv;
        let closed = solve_mode(
            &system,
            |t| ti.0[0][0] * f1(t) + ti.0[0][1] * f2(t),
            |t| ti.0[1][0] * f1(t) + ti.0[1][1] * f2(t),
            |t| params.big_q_at(t),
            |t| params.big_s_at(t),
            oracle_cfg.n_t,
        )
        .map_err(CliError::Lib)?;
        let shooting =
            oracle_shooting(&params, sc, f1, f2, oracle_cfg.n_t, oracle_cfg.substeps)
                .map_err(CliError::Lib)?;
        let deviation =
            relative_deviation(&closed.w1, &closed.w2, &shooting.w1, &shooting.w2);
        rows.push(json!({
            "a": sc.a,
            "b": sc.b,
            "weight": sc.weight,
            "rho": c64_json(system.rho),
            "d1_abs": system.d1.norm(),
            "d2_abs": system.d2.norm(),
            "relative_deviation": deviation,
            "monodromy_defect": shooting.monodromy_defect,
        }));
        if worst.as_ref().map_or(true, |(d, _)| deviation > *d) {
            worst = Some((deviation, *sc));
        }
    }

    // Side-by-side trace for the worst-agreeing class: closed form against
    // the shooting oracle on a coarse subgrid.
    let (worst_dev, worst_sc) = worst.expect("at least one class");
    let system = build_mode_system(&params, &worst_sc).map_err(CliError::Lib)?;
    let ti = system.t_inv;
    let closed = solve_mode(
        &system,
        |t| ti.0[0][0] * f1(t) + ti.0[0][1] * f2(t),
        |t| ti.0[1][0] * f1(t) + ti.0[1][1] * f2(t),
        |t| params.big_q_at(t),
        |t| params.big_s_at(t),
        oracle_cfg.n_t,
    )
    .map_err(CliError::Lib)?;
    let shooting =
        oracle_shooting(&params, &worst_sc, f1, f2, oracle_cfg.n_t, oracle_cfg.substeps)
            .map_err(CliError::Lib)?;
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:>8}  {:>29}  {:>29}  {:>29}  {:>29}",
        "t", "w1 closed", "w1 shooting", "w2 closed", "w2 shooting"
    );
    let stride = (oracle_cfg.n_t / 16).max(1);
    for i in (0..=oracle_cfg.n_t).step_by(stride) {
        let _ = writeln!(
            table,
            "{:>8.5}  {}  {}  {}  {}",
            closed.times[i],
            fmt_c(closed.w1[i]),
            fmt_c(shooting.w1[i]),
            fmt_c(closed.w2[i]),
            fmt_c(shooting.w2[i]),
        );
    }

    let result = json!({
        "n_t": oracle_cfg.n_t,
        "substeps": oracle_cfg.substeps,
        "classes": rows,
        "max_relative_deviation": worst_dev,
        "worst_class": { "a": worst_sc.a, "b": worst_sc.b },
        "worst_class_table": table.lines().collect::<Vec<_>>(),
    });
    let env = envelope("oracle", config_path, eff, result)?;
    emit(&env, eff)
}
