use mdlab_core::abk::{self, Completion, SixTermProblem, ZMap};
use mdlab_core::chern::{
    self, F2Invariant, F3Invariant, FoliationType, IndexInvariant, InvariantConfig, TopoIntegral,
};
use mdlab_core::coadjoint::{self, indexed_rng, Covector};
use mdlab_core::foliation::{self, ActionSpec, Stratum};
use mdlab_core::lie::{self, build_md5, FamilyId, Md5Family};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Check, Status};

const JACOBI_TOL: f64 = 1e-12;
const FLOW_TOL: f64 = 1e-9;
const CONSTANCY_TOL: f64 = 1e-9;

/// Parameter draws per family when none are given.
const DRAWS: u64 = 5;

/// Families to run with their labels: the one given, or `DRAWS` seeded
/// parameter draws of each.
pub fn families(given: Option<Md5Family>, seed: u64) -> Vec<(String, Md5Family)> {
    match given {
        Some(f) => vec![(f.id().to_string(), f)],
        None => FamilyId::ALL
            .iter()
            .flat_map(|id| {
                (0..DRAWS).map(move |k| {
                    let f = id.sample(&mut indexed_rng(seed ^ 0x5eed, id.index() as u64 * 16 + k));
                    (format!("{id}#{k}"), f)
                })
            })
            .collect(),
    }
}

pub fn algebra(family: Option<Md5Family>, cfg: &RunConfig) -> Vec<Check> {
    families(family, cfg.seed)
        .into_iter()
        .map(|(label, f)| match build_md5(f) {
            Ok(alg) => {
                let jacobi = lie::jacobi_residual(&alg);
                let ideal = lie::derived_ideal(&alg);
                let ok = jacobi < JACOBI_TOL && ideal.commutative && ideal.is_span_x2_to_x5(1e-10);
                Check::new(
                    format!("algebra/{label}"),
                    Status::from_bool(ok),
                    format!("jacobi {jacobi:.1e}, derived ideal dim {}", ideal.dim()),
                    json!({
                        "family": f,
                        "jacobi_residual": jacobi,
                        "derived_ideal_dim": ideal.dim(),
                        "derived_ideal_commutative": ideal.commutative,
                        "ad_x1_block": f.ad_block().transpose().as_slice(),
                    }),
                    "structure of the MD5 families: [g, g] = span(X2..X5) commutative, ad X1 acting by the family block",
                )
            }
            Err(e) => Check::new(format!("algebra/{label}"), Status::Fail, e.to_string(), json!({"family": f}), ""),
        })
        .collect()
}

pub fn mdcheck(family: Option<Md5Family>, cfg: &RunConfig) -> Vec<Check> {
    families(family, cfg.seed)
        .into_iter()
        .enumerate()
        .map(|(k, (label, f))| {
            let name = format!("mdcheck/{label}");
            let alg = match build_md5(f) {
                Ok(a) => a,
                Err(e) => {
                    return Check::new(name, Status::Fail, e.to_string(), json!({"family": f}), "")
                }
            };
            let r = coadjoint::md_verify_with_tol(
                &alg,
                cfg.samples,
                cfg.seed.wrapping_add(k as u64),
                cfg.rank_tol,
            );
            Check::new(
                name,
                Status::from_bool(r.passed()),
                format!(
                    "{} covectors, ranks {:?}, {} counterexamples",
                    r.samples, r.rank_histogram, r.counterexample_count
                ),
                json!({"family": f, "report": r}),
                "MD dichotomy: every coadjoint orbit has dimension 0 or 2",
            )
        })
        .collect()
}

pub fn orbit(
    family: Md5Family,
    covector: Option<Covector>,
    x: f64,
    grid: usize,
    cfg: &RunConfig,
) -> Vec<Check> {
    let name = format!("orbit/{}", family.id());
    if let Err(e) = family.validate() {
        return vec![Check::new(
            name,
            Status::Fail,
            e.to_string(),
            json!({"family": family}),
            "",
        )];
    }
    let covectors: Vec<Covector> = match covector {
        Some(f) => vec![f],
        None => (0..20u64)
            .map(|i| {
                let mut rng = indexed_rng(cfg.seed, i);
                Covector(std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            })
            .collect(),
    };
    let a_grid = coadjoint::a_grid(-3.0, 3.0, grid, x);
    let mut deviation: f64 = 0.0;
    for f in &covectors {
        deviation = deviation.max(coadjoint::flow_vs_closed_form(&family, f, &a_grid));
    }
    let desc = coadjoint::closed_form_orbit(family, covectors[0]);
    let samples: Vec<Value> = a_grid
        .iter()
        .step_by((grid / 8).max(1))
        .map(|&(x, a)| json!({"x": x, "a": a, "point": desc.point(x, a)}))
        .collect();
    vec![Check::new(
        name,
        Status::from_bool(deviation < FLOW_TOL),
        format!(
            "{} covectors, max flow deviation {deviation:.2e}",
            covectors.len()
        ),
        json!({
            "family": family,
            "stratum": desc.stratum,
            "closed_form_samples": samples,
            "flow_deviation": deviation,
        }),
        "explicit coadjoint orbit parametrizations of each family",
    )]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FoliationCheck {
    Preservation,
    Leafspace,
    Integrability,
    P1Audit,
    Fibration,
    All,
}

fn histogram_json<K: ToString>(h: &std::collections::BTreeMap<K, usize>) -> Value {
    Value::Object(h.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

pub fn foliation(
    action: Option<ActionSpec>,
    check: FoliationCheck,
    stratum: Option<Stratum>,
    cfg: &RunConfig,
) -> Vec<Check> {
    let actions: Vec<ActionSpec> = action.map(|a| vec![a]).unwrap_or(ActionSpec::ALL.to_vec());
    let n = cfg.samples;
    let mut out = Vec::new();
    let wants = |c: FoliationCheck| check == c || check == FoliationCheck::All;
    for &spec in &actions {
        if wants(FoliationCheck::Preservation) {
            let strata: Vec<Stratum> = stratum.map(|s| vec![s]).unwrap_or(spec.strata().to_vec());
            for s in strata {
                let name = format!("foliation/preservation/{spec}/{s}");
                match foliation::preservation_check(spec, s, n, cfg.seed) {
                    Ok(r) => out.push(Check::new(
                        name,
                        Status::from_bool(r.violation_count == 0),
                        format!("{} samples, {} violations", r.samples, r.violation_count),
                        json!({
                            "check": "preservation",
                            "stratum": s,
                            "residual_max": 0.0,
                            "rank_histogram": {},
                            "violations": r.violations,
                            "violation_count": r.violation_count,
                        }),
                        "the strata are invariant under the R^2 actions",
                    )),
                    Err(e) => {
                        out.push(Check::new(name, Status::Fail, e.to_string(), json!({}), ""))
                    }
                }
            }
        }
        if wants(FoliationCheck::Leafspace) {
            for &s in foliation::modelled_strata(spec) {
                if stratum.is_some_and(|t| t != s) {
                    continue;
                }
                let c = foliation::invariant_check(s, n.min(1_000), cfg.seed)
                    .expect("modelled strata have invariants");
                out.push(Check::new(
                    format!("foliation/leafspace/{spec}/{s}"),
                    Status::from_bool(c.passed(CONSTANCY_TOL)),
                    format!(
                        "{} -> {}, constancy {:.1e}, ranks {:?}",
                        c.algebra, c.model, c.constancy_residual, c.rank_histogram
                    ),
                    json!({
                        "check": "leafspace",
                        "stratum": s,
                        "residual_max": c.constancy_residual,
                        "rank_histogram": histogram_json(&c.rank_histogram),
                        "violations": [],
                        "model": c.model,
                        "model_dim": c.model_dim,
                        "algebra": c.algebra,
                    }),
                    "leaf spaces of the restricted foliations are modelled by the listed spaces",
                ));
            }
        }
        if wants(FoliationCheck::Integrability) {
            let r = foliation::integrability_check(spec, n.min(1_000), cfg.seed);
            out.push(Check::new(
                format!("foliation/integrability/{spec}"),
                Status::from_bool(r.passed()),
                format!(
                    "bracket {:.1e}, tangent {:.1e}",
                    r.bracket_residual, r.orbit_tangent_residual
                ),
                json!({
                    "check": "integrability",
                    "stratum": null,
                    "residual_max": r.bracket_residual,
                    "rank_histogram": histogram_json(&r.rank_histogram),
                    "violations": [],
                    "orbit_tangent_residual": r.orbit_tangent_residual,
                }),
                "the maximal-dimensional orbits form a measurable foliation",
            ));
        }
        if spec == ActionSpec::Lambda12 && wants(FoliationCheck::P1Audit) {
            let a = foliation::p1_submersion_audit(n.min(1_000), cfg.seed);
            // reproducing the discrepancy is the expected outcome
            let ok = !a.literal_constant && a.invariant_constant && a.sign_constant;
            out.push(Check::new(
                "foliation/p1-audit/lambda12/V1",
                Status::from_bool(ok),
                format!(
                    "literal map varies by {:.2e} along orbits, replacement invariant by {:.1e}",
                    a.literal_variation, a.invariant_variation
                ),
                json!({
                    "check": "p1-audit",
                    "stratum": Stratum::V1,
                    "residual_max": a.invariant_variation,
                    "rank_histogram": {},
                    "violations": [],
                    "audit": a,
                }),
                "the submersion V1 -> R^3 ⊔ R^3 defining the leaf space of the first restricted foliation",
            ));
        }
        if spec == ActionSpec::Lambda12 && wants(FoliationCheck::Fibration) {
            let r = foliation::f1_fibration_check(n.min(1_000), cfg.seed);
            out.push(Check::new(
                "foliation/fibration/F1",
                Status::from_bool(r.passed()),
                format!(
                    "constancy {:.1e}, ranks {:?}",
                    r.constancy_residual, r.rank_histogram
                ),
                json!({
                    "check": "fibration",
                    "stratum": null,
                    "residual_max": r.constancy_residual,
                    "rank_histogram": histogram_json(&r.rank_histogram),
                    "violations": [],
                }),
                "the foliation of 5_4_5 is a fibration over S^3",
            ));
        }
    }
    out
}

fn completion_json(c: &Completion) -> Value {
    let s = &c.representative;
    json!({
        "groups": s.groups,
        "maps": s.maps.iter().map(|m| m.row_vecs()).collect::<Vec<_>>(),
        "exact": s.exactness(),
        "class_size": c.class_size,
    })
}

pub fn sixterm(preset: &str, bound: i64) -> Vec<Check> {
    let name = format!("sixterm/{preset}");
    let problem = match SixTermProblem::preset(preset, bound) {
        Ok(p) => p,
        Err(e) => return vec![Check::new(name, Status::Fail, e.to_string(), json!({}), "")],
    };
    let sols = match abk::solve_six_term(&problem) {
        Ok(s) => s,
        Err(e) => {
            return vec![Check::new(
                name,
                Status::Inconclusive,
                e.to_string(),
                json!({"bound": bound}),
                "",
            )]
        }
    };
    let (ok, summary, anchor) = match preset.to_ascii_lowercase().as_str() {
        "allz" => (
            sols.len() == 2,
            format!("{} completions up to automorphism", sols.len()),
            "six copies of Z admit exactly the two alternating patterns",
        ),
        "gamma1" => {
            let ranks: Vec<(usize, usize)> = sols
                .iter()
                .map(|c| (c.representative.groups[1], c.representative.groups[4]))
                .collect();
            (
                !ranks.is_empty() && ranks.iter().all(|&r| r == (1, 1)),
                format!("K-group ranks forced to {ranks:?}"),
                "K0(C*(F2)) = Z and K1(C*(F2)) = Z",
            )
        }
        _ => (
            sols.len() == 1 && sols[0].representative.is_exact(),
            format!("{} completion(s)", sols.len()),
            "the index-invariant hexagon closes exactly",
        ),
    };
    vec![Check::new(
        name,
        Status::from_bool(ok),
        summary,
        json!({"preset": preset, "bound": bound, "completions": sols.iter().map(completion_json).collect::<Vec<_>>()}),
        anchor,
    )]
}

fn integral_json(t: &TopoIntegral) -> Value {
    json!({
        "witness": t.witness,
        "raw_integral": t.raw_integral,
        "imaginary_part": t.imaginary_part,
        "rounded": t.rounded,
        "residual": t.residual,
        "grid": t.grid,
        "boundary_variation": t.boundary_variation,
        "refinement_delta": t.refinement_delta,
    })
}

fn invariant_status(converged: bool, values_ok: bool) -> Status {
    match (converged, values_ok) {
        (false, _) => Status::Inconclusive,
        (true, true) => Status::Pass,
        (true, false) => Status::Fail,
    }
}

fn suggestion(cfg: &RunConfig) -> String {
    format!(
        "refine: --grid2d {} --grid3d {} --truncation {}",
        cfg.grid2d * 2,
        cfg.grid3d * 2,
        cfg.truncation * 2.0
    )
}

fn f2_check(r: &F2Invariant, cfg: &RunConfig) -> Check {
    let values_ok = r.gamma1 == ZMap::from_rows(&[vec![0, 1], vec![0, 1]])
        && r.gamma2 == ZMap::column_vector(&[1, 1])
        && r.hexagons_consistent;
    let status = invariant_status(r.converged, values_ok);
    let mut summary = format!(
        "γ1 = {}, γ2 = ({}, {}), max residual {:.1e}",
        r.gamma1, r.coefficients.0, r.coefficients.1, r.max_residual
    );
    if status == Status::Inconclusive {
        summary = format!("{summary}; {}", suggestion(cfg));
    }
    let integrals = [
        &r.lift_plus,
        &r.lift_minus,
        &r.reference_plus,
        &r.reference_minus,
        &r.unit_lift,
    ];
    Check::new(
        "invariants/F2",
        status,
        summary,
        json!({
            "witness": "exp_ptilde_plus, exp_ptilde_minus",
            "integrals": integrals.iter().map(|t| integral_json(t)).collect::<Vec<_>>(),
            "raw_integral": [r.lift_plus.raw_integral, r.lift_minus.raw_integral],
            "rounded": [r.coefficients.0, r.coefficients.1],
            "residual": r.max_residual,
            "grid": r.lift_plus.grid,
            "truncation": cfg.truncation,
            "gamma_matrix": {"gamma1": r.gamma1.row_vecs(), "gamma2": r.gamma2.row_vecs()},
            "hexagons_consistent": r.hexagons_consistent,
        }),
        "index invariants of C*(F2): γ1 = [[0,1],[0,1]], γ2 = (1,1)",
    )
}

fn f3_check(r: &F3Invariant, cfg: &RunConfig) -> Check {
    let values_ok = r.gamma3 == (0, 1) && r.hexagon_consistent;
    let status = invariant_status(r.converged, values_ok);
    let mut summary = format!(
        "γ3 = ({}, {}), raw c1 {:.6}, max residual {:.1e}",
        r.gamma3.0, r.gamma3.1, r.p_gamma3.raw_integral, r.max_residual
    );
    if status == Status::Inconclusive {
        summary = format!("{summary}; {}", suggestion(cfg));
    }
    Check::new(
        "invariants/F3",
        status,
        summary,
        json!({
            "witness": "p_gamma3",
            "integrals": [integral_json(&r.p_gamma3), integral_json(&r.reference), integral_json(&r.unit_lift)],
            "raw_integral": r.p_gamma3.raw_integral,
            "rounded": r.p_gamma3.rounded,
            "residual": r.max_residual,
            "grid": r.p_gamma3.grid,
            "gamma_matrix": {"gamma3": [r.gamma3.0, r.gamma3.1]},
            "square_audit": r.square_audit,
            "hexagon_consistent": r.hexagon_consistent,
        }),
        "index invariant of C*(F3): γ3 = (0,1)",
    )
}

pub fn invariants(kind: FoliationType, cfg: &RunConfig) -> Vec<Check> {
    let icfg = InvariantConfig {
        grid2d: cfg.grid2d,
        grid3d: cfg.grid3d,
        truncation: cfg.truncation,
        residual_tol: cfg.residual_tol,
    };
    let name = match kind {
        FoliationType::F2 => "invariants/F2",
        FoliationType::F3 => "invariants/F3",
    };
    match chern::index_invariant(kind, &icfg) {
        Ok(IndexInvariant::F2(r)) => vec![f2_check(&r, cfg)],
        Ok(IndexInvariant::F3(r)) => vec![f3_check(&r, cfg)],
        Err(e) => vec![Check::new(
            name,
            Status::Inconclusive,
            format!("{e}; {}", suggestion(cfg)),
            json!({}),
            "",
        )],
    }
}

pub fn witnesses(cfg: &RunConfig) -> Vec<Check> {
    let r = chern::witness_identities(cfg.samples, cfg.seed);
    let mut winding = Vec::new();
    for (name, side, power) in [
        ("uplus", chern::Side::Plus, 1),
        ("uminus", chern::Side::Minus, 1),
        ("uplus^2", chern::Side::Plus, 2),
    ] {
        match chern::winding_1d(
            &chern::HalfLinePhase { side, power },
            side,
            cfg.quadrature_tol,
            name,
        ) {
            Ok(t) => winding.push(integral_json(&t)),
            Err(e) => winding.push(json!({"witness": name, "error": e.to_string()})),
        }
    }
    vec![Check::new(
        "witnesses",
        Status::from_bool(r.passed()),
        format!(
            "projection {:.1e}, unitarity {:.1e}, W(u+) = {}",
            r.phat_projection.max(r.p_gamma3_projection),
            r.u_gamma3_unitary,
            r.winding_uplus.rounded
        ),
        json!({"report": r, "windings": winding}),
        "the witnesses p̂, p̃, u±, u, q and p = u q u* satisfy their defining identities",
    )]
}

pub fn reproduce(cfg: &RunConfig) -> Vec<Check> {
    let mut out = algebra(None, cfg);
    out.extend(mdcheck(None, cfg));
    for id in FamilyId::ALL {
        let family = id.sample(&mut indexed_rng(cfg.seed, id.index() as u64));
        out.extend(orbit(family, None, 0.5, 100, cfg));
    }
    out.extend(foliation(None, FoliationCheck::All, None, cfg));
    for (preset, bound) in [("allZ", 3), ("gamma1", 2), ("gamma2", 2), ("gamma3", 2)] {
        out.extend(sixterm(preset, bound));
    }
    out.extend(witnesses(cfg));
    out.extend(invariants(FoliationType::F2, cfg));
    out.extend(invariants(FoliationType::F3, cfg));
    out
}
