use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{born_ket, rationalize, DensityMatrix, Ket, Observable, Povm, QuantumError, Result, Tensor, Tolerances};
use crate::ontomodel::OntologicalModel;
use crate::probcore::{Assignment, Context, Dist, EmpiricalModel, Label, MeasurementScenario};
use crate::rational::Rational;

/// Scenario whose contexts and outcomes are read off the POVM labels, which
/// must be joint events of their context (`a0=0,b0=1`).
fn scenario_from_povms(measurements: &[(Context, Povm)]) -> Result<(MeasurementScenario, Vec<Vec<Assignment>>)> {
    let mut outcomes: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    let mut events = Vec::new();
    for (ctx, povm) in measurements {
        let mut evs = Vec::new();
        for label in povm.labels() {
            let bad = || QuantumError::BadOutcomeLabel {
                label: label.clone(),
                context: ctx.to_string(),
            };
            let ev = Assignment::parse(label).map_err(|_| bad())?;
            if !ev.domain_is(ctx) {
                return Err(bad());
            }
            for (m, o) in ev.iter() {
                let list = outcomes.entry(m.clone()).or_default();
                if !list.contains(o) {
                    list.push(o.clone());
                }
            }
            evs.push(ev);
        }
        events.push(evs);
    }
    let cover = measurements.iter().map(|(c, _)| c.clone()).collect();
    Ok((MeasurementScenario::new(outcomes, cover)?, events))
}

/// Additive correction that gives `joint` the target single-measurement
/// marginals while keeping its total. Spreads each marginal defect uniformly
/// over the other measurements' outcomes. `None` if a cell would go negative.
fn match_marginals(
    joint: &Dist<Assignment>,
    ctx: &Context,
    scenario: &MeasurementScenario,
    targets: &BTreeMap<Label, Dist<Assignment>>,
) -> Option<Dist<Assignment>> {
    let ms = ctx.measurements();
    let counts: Vec<usize> = ms.iter().map(|m| scenario.outcomes(m).expect("known").len()).collect();
    let mut defects: Vec<BTreeMap<Label, Rational>> = Vec::new();
    for m in ms {
        let single = Context::singleton(m);
        let current = joint.map(|ev| ev.restrict(&single));
        let target = &targets[m];
        defects.push(
            scenario
                .outcomes(m)
                .expect("known")
                .iter()
                .map(|o| {
                    let ev = Assignment::new([(m.as_str(), o.as_str())]).expect("valid labels");
                    (o.clone(), target.weight(&ev) - current.weight(&ev))
                })
                .collect(),
        );
    }
    if defects.iter().all(|d| d.values().all(Zero::is_zero)) {
        return Some(joint.clone());
    }
    let mut cells = Vec::new();
    for ev in scenario.events(ctx) {
        let mut w = joint.weight(&ev);
        for (i, m) in ms.iter().enumerate() {
            let spread: usize = counts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, n)| n)
                .product();
            w += &defects[i][ev.get(m).expect("event of ctx")] / Rational::from_integer(spread.into());
        }
        if w.is_negative() {
            return None;
        }
        cells.push((ev, w));
    }
    Dist::new(cells).ok()
}

/// Model whose ontic states are the prepared kets themselves, each prepared
/// with certainty, responding with rationalized Born probabilities.
///
/// Every single-measurement marginal is rationalized once per state and the
/// joint tables are corrected to it, so parameter independence survives the
/// rounding exactly.
pub fn psi_complete_model(
    preps: &[(Label, Ket)],
    measurements: &[(Context, Povm)],
    max_den: u64,
) -> Result<OntologicalModel> {
    let (scenario, events) = scenario_from_povms(measurements)?;
    let dim = measurements.first().map_or(0, |(_, p)| p.dim());
    for d in measurements
        .iter()
        .map(|(_, p)| p.dim())
        .chain(preps.iter().map(|(_, k)| k.dim()))
    {
        if d != dim {
            return Err(QuantumError::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    let mut responses = BTreeMap::new();
    for (state, ket) in preps {
        let mut floats: Vec<Vec<(Assignment, f64)>> = Vec::new();
        for ((_, povm), evs) in measurements.iter().zip(&events) {
            let p = born_ket(ket, povm)?;
            floats.push(evs.iter().cloned().zip(p.into_iter().map(|(_, x)| x)).collect());
        }
        let mut targets = BTreeMap::new();
        for m in scenario.measurements() {
            let single = Context::singleton(m);
            let idx = scenario.cover().iter().position(|c| c.contains(m)).expect("covered");
            let mut marg: BTreeMap<Assignment, f64> = BTreeMap::new();
            for (ev, x) in &floats[idx] {
                *marg.entry(ev.restrict(&single)).or_insert(0.0) += x;
            }
            let marg: Vec<(Assignment, f64)> = marg.into_iter().map(|(e, x)| (e, x.min(1.0))).collect();
            targets.insert(m.clone(), rationalize(&marg, max_den)?);
        }
        for (ctx, table) in scenario.cover().iter().zip(&floats) {
            let joint = rationalize(table, max_den)?;
            let fixed = match_marginals(&joint, ctx, &scenario, &targets).ok_or_else(|| {
                QuantumError::RationalizationFailed {
                    state: state.clone(),
                    context: ctx.to_string(),
                }
            })?;
            responses.insert((state.clone(), ctx.clone()), fixed);
        }
    }
    let labels: Vec<Label> = preps.iter().map(|(l, _)| l.clone()).collect();
    let prep_dists = labels.iter().map(|l| (l.clone(), Dist::delta(l.clone()))).collect();
    Ok(OntologicalModel::new(
        scenario,
        labels.clone(),
        labels,
        prep_dists,
        responses,
    )?)
}

/// Rationalized statistics of one pure state.
pub fn quantum_empirical_model(psi: &Ket, measurements: &[(Context, Povm)], max_den: u64) -> Result<EmpiricalModel> {
    let h = psi_complete_model(&[("ψ".to_string(), psi.clone())], measurements, max_den)?;
    Ok(h.operational_probabilities("ψ")?)
}

/// Measurement angles in the XZ plane reaching `2√2` on `|φ+⟩`.
pub fn chsh_angles() -> [(&'static str, f64); 4] {
    [("a0", 0.0), ("a1", FRAC_PI_2), ("b0", FRAC_PI_4), ("b1", -FRAC_PI_4)]
}

/// The four (2,2,2) contexts with product POVMs at [`chsh_angles`].
pub fn chsh_measurements() -> Vec<(Context, Povm)> {
    let angle: BTreeMap<&str, f64> = chsh_angles().into_iter().collect();
    MeasurementScenario::bell_222()
        .cover()
        .iter()
        .map(|ctx| {
            let ms = ctx.measurements();
            let povm = Povm::xz(&ms[0], angle[ms[0].as_str()]).tensor(&Povm::xz(&ms[1], angle[ms[1].as_str()]));
            (ctx.clone(), povm)
        })
        .collect()
}

/// `(|00⟩ + |01⟩ + |10⟩)/√3`.
pub fn hardy_state() -> Ket {
    Ket::real(&[1.0, 1.0, 1.0, 0.0]).expect("nonzero")
}

/// `a1`, `b1` measure Z; `a0`, `b0` measure X with outcome `0` on `|−⟩`.
/// On [`hardy_state`] this gives `P(a0=0,b0=0) = 1/12` while
/// `P(a0=0,b1=0)`, `P(a1=0,b0=0)` and `P(a1=1,b1=1)` vanish.
pub fn hardy_measurements() -> Vec<(Context, Povm)> {
    let single = |m: &str| {
        if m.ends_with('0') {
            Povm::projective(vec![(format!("{m}=0"), Ket::minus()), (format!("{m}=1"), Ket::plus())]).expect("basis")
        } else {
            Povm::z(m)
        }
    };
    MeasurementScenario::bell_222()
        .cover()
        .iter()
        .map(|ctx| {
            let ms = ctx.measurements();
            (ctx.clone(), single(&ms[0]).tensor(&single(&ms[1])))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Epistemicity {
    /// `psi` lies in one eigenspace.
    Ontic { value: f64 },
    /// `psi` has weight on eigenspaces of two distinct eigenvalues.
    Epistemic { values: (f64, f64), probs: (f64, f64) },
}

pub fn observable_epistemicity(psi: &Ket, a: &Observable) -> Epistemicity {
    let tol = Tolerances::default();
    let weights: Vec<(f64, f64)> = a
        .spectrum()
        .iter()
        .map(|(v, p)| (*v, (psi.amplitudes().adjoint() * p * psi.amplitudes())[(0, 0)].re))
        .filter(|(_, w)| *w > tol.structure)
        .collect();
    match weights.as_slice() {
        [(v1, w1), (v2, w2), ..] => Epistemicity::Epistemic {
            values: (*v1, *v2),
            probs: (*w1, *w2),
        },
        [(v, _)] => Epistemicity::Ontic { value: *v },
        [] => unreachable!("a unit vector has weight somewhere"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringBranch {
    pub outcome: Label,
    pub probability: f64,
    pub remote: Ket,
}

/// Measures the first qubit of `|φ+⟩` and returns each outcome with the state
/// it leaves on the second qubit.
pub fn steering_demo(basis: Basis) -> Vec<SteeringBranch> {
    let (names, kets) = match basis {
        Basis::Z => (["0", "1"], [Ket::zero(), Ket::one()]),
        Basis::X => (["+", "-"], [Ket::plus(), Ket::minus()]),
    };
    let phi = Ket::phi_plus();
    let psi = phi.amplitudes();
    names
        .iter()
        .zip(kets)
        .map(|(name, e)| {
            let e = e.amplitudes();
            let v: Vec<_> = (0..2)
                .map(|j| (0..2).map(|k| e[k].conj() * psi[2 * k + j]).sum())
                .collect();
            let probability = v.iter().map(|z: &super::C64| z.norm_sqr()).sum();
            SteeringBranch {
                outcome: name.to_string(),
                probability,
                remote: Ket::normalized(v).expect("nonzero branch"),
            }
        })
        .collect()
}

/// Density matrix of the remote qubit averaged over the branches.
pub fn remote_state(branches: &[SteeringBranch]) -> Result<DensityMatrix> {
    let parts: Vec<(f64, DensityMatrix)> = branches.iter().map(|b| (b.probability, b.remote.density())).collect();
    DensityMatrix::mixture(&parts)
}

/// Schmidt coefficients of a bipartite pure state, descending.
pub fn schmidt_coefficients(psi: &Ket, da: usize, db: usize) -> Result<Vec<f64>> {
    if da * db != psi.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: da * db,
            found: psi.dim(),
        });
    }
    let m = DMatrix::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
