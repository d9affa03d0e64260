//! Local (non-contextual) realizability of empirical models.
//!
//! A model is local exactly when its tables are the marginals of one
//! distribution over global assignments. [`decide_local`] settles this with an
//! exact LP and returns either that distribution or a Farkas certificate,
//! which reads as a Bell-type inequality the model violates. Both artifacts
//! have verifiers that only enumerate global assignments and never touch the
//! LP code.

mod affine;
pub mod lp;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

pub use affine::solve_affine;
pub use lp::{lp_feasibility, LpError, LpOutcome};

use crate::probcore::{check_no_signalling, Assignment, Context, Dist, EmpiricalModel, SignallingWitness};
use crate::rational::{common_denominator, ser, Rational};

/// Default ceiling on the number of global assignments (LP columns).
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideOptions {
    pub cap: u128,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("{size} global assignments exceed the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("model is signalling on {}: no signed decomposition", .0.measurement)]
    Signalling(SignallingWitness),
    #[error("affine marginal system is inconsistent")]
    Inconsistent,
}

/// Distribution over global assignments reproducing every table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LocalWitness {
    pub dist: Dist<Assignment>,
}

/// Linear functional on the tables whose value on the model exceeds its
/// maximum over all global assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonlocalityCertificate {
    #[serde(serialize_with = "ser::nested_rationals")]
    pub coefficients: BTreeMap<Context, BTreeMap<Assignment, Rational>>,
    #[serde(serialize_with = "ser::rational")]
    pub model_value: Rational,
    #[serde(serialize_with = "ser::rational")]
    pub local_bound: Rational,
}

/// Quasi-probability over global assignments: signs unrestricted, sum one,
/// marginals exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SignedWeights {
    #[serde(serialize_with = "ser::rational_map")]
    pub weights: BTreeMap<Assignment, Rational>,
}

impl SignedWeights {
    pub fn has_negative(&self) -> bool {
        self.weights.values().any(Signed::is_negative)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum LocalDecision {
    Local { witness: LocalWitness },
    Nonlocal { certificate: NonlocalityCertificate },
}

impl LocalDecision {
    pub fn is_local(&self) -> bool {
        matches!(self, LocalDecision::Local { .. })
    }
}

/// Marginal constraints: one row per (context, event), then normalization.
struct System {
    columns: Vec<Assignment>,
    rows: Vec<(Context, Assignment)>,
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
}

fn build_system(e: &EmpiricalModel, opts: &DecideOptions) -> Result<System, DecideError> {
    let s = e.scenario();
    let size = s.global_assignment_count();
    if size > opts.cap {
        return Err(DecideError::TooLarge { size, cap: opts.cap });
    }
    let columns = s.global_assignments();
    let mut rows = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for ctx in s.cover() {
        let restricted: Vec<Assignment> = columns.iter().map(|w| w.restrict(ctx)).collect();
        for ev in s.events(ctx) {
            a.push(
                restricted
                    .iter()
                    .map(|r| if *r == ev { Rational::one() } else { Rational::zero() })
                    .collect(),
            );
            b.push(e.entry(ctx, &ev));
            rows.push((ctx.clone(), ev));
        }
    }
    a.push(vec![Rational::one(); columns.len()]);
    b.push(Rational::one());
    Ok(System { columns, rows, a, b })
}

pub fn decide_local(e: &EmpiricalModel) -> Result<LocalDecision, DecideError> {
    decide_local_with(e, &DecideOptions::default())
}

pub fn decide_local_with(e: &EmpiricalModel, opts: &DecideOptions) -> Result<LocalDecision, DecideError> {
    let sys = build_system(e, opts)?;
    let outcome = lp_feasibility(&sys.a, &sys.b).expect("system is rectangular");
    match outcome {
        LpOutcome::Feasible(x) => {
            let dist = Dist::from_normalized(sys.columns.into_iter().zip(x).collect());
            Ok(LocalDecision::Local {
                witness: LocalWitness { dist },
            })
        }
        LpOutcome::Infeasible(y) => {
            // drop the normalization multiplier; it only shifts both sides
            let mut raw: BTreeMap<Context, BTreeMap<Assignment, Rational>> = BTreeMap::new();
            for ((ctx, ev), yi) in sys.rows.into_iter().zip(y) {
                if !yi.is_zero() {
                    raw.entry(ctx).or_default().insert(ev, yi);
                }
            }
            let scale = integer_scale(raw.values().flat_map(|m| m.values()));
            for m in raw.values_mut() {
                for v in m.values_mut() {
                    *v *= &scale;
                }
            }
            Ok(LocalDecision::Nonlocal {
                certificate: certificate_from_coefficients(e, raw),
            })
        }
    }
}

/// Positive factor that turns the values into coprime integers.
fn integer_scale<'a>(values: impl Iterator<Item = &'a Rational> + Clone) -> Rational {
    let den = common_denominator(values.clone());
    let g = values.fold(BigInt::zero(), |acc, v| acc.gcd(&(v.numer() * (&den / v.denom()))));
    if g.is_zero() {
        return Rational::one();
    }
    Rational::new(den, g)
}

/// Value of the functional on one global assignment.
fn functional_at(coefficients: &BTreeMap<Context, BTreeMap<Assignment, Rational>>, omega: &Assignment) -> Rational {
    coefficients
        .iter()
        .filter_map(|(ctx, row)| row.get(&omega.restrict(ctx)))
        .sum()
}

fn model_value(e: &EmpiricalModel, coefficients: &BTreeMap<Context, BTreeMap<Assignment, Rational>>) -> Rational {
    coefficients
        .iter()
        .flat_map(|(ctx, row)| row.iter().map(move |(ev, c)| c * e.entry(ctx, ev)))
        .sum()
}

fn local_bound(e: &EmpiricalModel, coefficients: &BTreeMap<Context, BTreeMap<Assignment, Rational>>) -> Rational {
    e.scenario()
        .global_assignments()
        .iter()
        .map(|w| functional_at(coefficients, w))
        .max()
        .expect("at least one global assignment")
}

/// Evaluates an arbitrary functional on `e` and on every global assignment.
/// The result need not exhibit a violation.
pub fn certificate_from_coefficients(
    e: &EmpiricalModel,
    coefficients: BTreeMap<Context, BTreeMap<Assignment, Rational>>,
) -> NonlocalityCertificate {
    NonlocalityCertificate {
        model_value: model_value(e, &coefficients),
        local_bound: local_bound(e, &coefficients),
        coefficients,
    }
}

/// CHSH functional on the (2,2,2) scenario: `Σ_{xy} (-1)^{xy} (P(a=b) - P(a≠b))`,
/// bounded by 2 on local models. Expects measurements `a0,a1,b0,b1`.
pub fn chsh_coefficients(e: &EmpiricalModel) -> BTreeMap<Context, BTreeMap<Assignment, Rational>> {
    let mut out = BTreeMap::new();
    for ctx in e.scenario().cover() {
        let ms = ctx.measurements();
        let xy = ms.iter().all(|m| m.ends_with('1'));
        let mut row = BTreeMap::new();
        for ev in e.scenario().events(ctx) {
            let same = ev.get(&ms[0]) == ev.get(&ms[1]);
            let sign = if same != xy { 1 } else { -1 };
            row.insert(ev, Rational::from_integer(sign.into()));
        }
        out.insert(ctx.clone(), row);
    }
    out
}

pub fn verify_witness(e: &EmpiricalModel, w: &LocalWitness) -> bool {
    let s = e.scenario();
    let all = s.measurements().cloned().collect::<Vec<_>>();
    let Ok(full) = Context::new(all) else {
        return false;
    };
    if w.dist.support().any(|omega| s.check_event(&full, omega).is_err()) {
        return false;
    }
    s.cover().iter().all(|ctx| {
        let marg = w.dist.map(|omega| omega.restrict(ctx));
        s.events(ctx).iter().all(|ev| marg.weight(ev) == e.entry(ctx, ev))
    })
}

/// Recomputes both sides by enumeration and checks the strict violation.
pub fn verify_certificate(e: &EmpiricalModel, c: &NonlocalityCertificate) -> bool {
    let s = e.scenario();
    for (ctx, row) in &c.coefficients {
        if !s.has_context(ctx) || row.keys().any(|ev| s.check_event(ctx, ev).is_err()) {
            return false;
        }
    }
    let value = model_value(e, &c.coefficients);
    let bound = local_bound(e, &c.coefficients);
    value == c.model_value && bound == c.local_bound && value > bound
}

pub fn verify_signed(e: &EmpiricalModel, w: &SignedWeights) -> bool {
    let s = e.scenario();
    if w.weights.values().sum::<Rational>() != Rational::one() {
        return false;
    }
    s.cover().iter().all(|ctx| {
        let mut marg: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (omega, v) in &w.weights {
            *marg.entry(omega.restrict(ctx)).or_insert_with(Rational::zero) += v;
        }
        s.events(ctx)
            .iter()
            .all(|ev| marg.get(ev).cloned().unwrap_or_else(Rational::zero) == e.entry(ctx, ev))
    })
}

pub fn quasi_local_decomposition(e: &EmpiricalModel) -> Result<SignedWeights, DecideError> {
    quasi_local_decomposition_with(e, &DecideOptions::default())
}

/// Signed weights over global assignments reproducing `e`. Refused for
/// signalling models. Local models reuse their (non-negative) witness.
pub fn quasi_local_decomposition_with(e: &EmpiricalModel, opts: &DecideOptions) -> Result<SignedWeights, DecideError> {
    check_no_signalling(e).map_err(DecideError::Signalling)?;
    if let LocalDecision::Local { witness } = decide_local_with(e, opts)? {
        return Ok(SignedWeights {
            weights: witness.dist.weights().clone(),
        });
    }
    let sys = build_system(e, opts)?;
    let x = solve_affine(&sys.a, &sys.b).ok_or(DecideError::Inconsistent)?;
    let weights = sys.columns.into_iter().zip(x).filter(|(_, v)| !v.is_zero()).collect();
    Ok(SignedWeights { weights })
}
