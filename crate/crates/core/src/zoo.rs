//! Named reference models.

use num_traits::Zero;
use thiserror::Error;

use crate::io::Model;
use crate::prepscen::{pbr_counterexample, PrepError};
use crate::probcore::{Assignment, Context, EmpiricalModel, MeasurementScenario};
use crate::properties::fuzzy_coin;
use crate::quantum::{
    chsh_measurements, hardy_measurements, hardy_state, psi_complete_model, quantum_empirical_model, Ket, QuantumError,
    DEFAULT_MAX_DENOMINATOR,
};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZooError {
    #[error("unknown zoo entry {0:?} (try `zoo list`)")]
    UnknownEntry(String),
    #[error("entry {0} takes no q parameter")]
    QNotApplicable(String),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Default `q` of the `pbr-q` entry.
pub fn default_q() -> Rational {
    ratio(1, 4)
}

/// Every exportable name with a one-line description. `prbox` is an alias of
/// `prbox-0` and is not listed separately.
pub fn entries() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..8 {
        let (a, b, g) = (i >> 2 & 1, i >> 1 & 1, i & 1);
        out.push((
            format!("prbox-{i}"),
            format!("PR box with a xor b = xy xor {a}x xor {b}y xor {g}"),
        ));
    }
    out.push((
        "chsh-quantum".into(),
        "|φ+⟩ at optimal CHSH angles, rationalized at 10^6".into(),
    ));
    out.push((
        "hardy".into(),
        "Hardy's state and measurements, rationalized at 10^6".into(),
    ));
    out.push(("specker-triangle".into(), "three pairwise-anticorrelated bits".into()));
    for i in 0..16 {
        out.push((
            format!("deterministic-222-{i}"),
            format!("point mass on the global assignment {}", global_assignment(i)),
        ));
    }
    out.push((
        "fuzzy-coin-property".into(),
        "fuzzy-coin property: GW and WG are compatible with both faces".into(),
    ));
    out.push((
        "psi-complete-chsh".into(),
        "ψ-complete model of |φ+⟩ at optimal CHSH angles".into(),
    ));
    out.push((
        "pbr-q".into(),
        "two-site overlap model; --q NUM/DEN, default 1/4".into(),
    ));
    out
}

fn bit(e: &Assignment, m: &str) -> u8 {
    e.get(m).expect("measurement in event").parse().expect("binary outcome")
}

/// `P(a,b|x,y) = 1/2` iff `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ`.
pub fn prbox(alpha: u8, beta: u8, gamma: u8) -> EmpiricalModel {
    EmpiricalModel::from_fn(MeasurementScenario::bell_222(), |c, e| {
        let ms = c.measurements();
        let x = (ms[0] == "a1") as u8;
        let y = (ms[1] == "b1") as u8;
        if bit(e, &ms[0]) ^ bit(e, &ms[1]) == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma {
            ratio(1, 2)
        } else {
            Rational::zero()
        }
    })
    .expect("valid tables")
}

pub fn prbox_variant(i: u8) -> EmpiricalModel {
    prbox(i >> 2 & 1, i >> 1 & 1, i & 1)
}

/// Bits of `i` give `a0, a1, b0, b1`, least significant first.
pub fn global_assignment(i: u8) -> Assignment {
    Assignment::new([
        ("a0", (i & 1).to_string()),
        ("a1", (i >> 1 & 1).to_string()),
        ("b0", (i >> 2 & 1).to_string()),
        ("b1", (i >> 3 & 1).to_string()),
    ])
    .expect("valid labels")
}

pub fn deterministic_box(omega: &Assignment) -> EmpiricalModel {
    EmpiricalModel::from_fn(MeasurementScenario::bell_222(), |c, e| {
        if omega.restrict(c) == *e {
            int(1)
        } else {
            Rational::zero()
        }
    })
    .expect("valid tables")
}

pub fn specker_triangle() -> EmpiricalModel {
    let outcomes = ["x", "y", "z"]
        .iter()
        .map(|m| (m.to_string(), vec!["0".to_string(), "1".to_string()]))
        .collect();
    let cover = ["x,y", "y,z", "x,z"]
        .iter()
        .map(|c| Context::parse(c).expect("valid"))
        .collect();
    let s = MeasurementScenario::new(outcomes, cover).expect("valid scenario");
    EmpiricalModel::from_fn(s, |c, e| {
        let ms = c.measurements();
        if e.get(&ms[0]) != e.get(&ms[1]) {
            ratio(1, 2)
        } else {
            Rational::zero()
        }
    })
    .expect("valid tables")
}

fn indexed(name: &str, prefix: &str, max: u8) -> Option<u8> {
    name.strip_prefix(prefix)?.parse().ok().filter(|i| *i < max)
}

pub fn model(name: &str, q: Option<&Rational>) -> Result<Model, ZooError> {
    if q.is_some() && name != "pbr-q" {
        return Err(ZooError::QNotApplicable(name.to_string()));
    }
    if name == "prbox" {
        return Ok(Model::Empirical(prbox_variant(0)));
    }
    if let Some(i) = indexed(name, "prbox-", 8) {
        return Ok(Model::Empirical(prbox_variant(i)));
    }
    if let Some(i) = indexed(name, "deterministic-222-", 16) {
        return Ok(Model::Empirical(deterministic_box(&global_assignment(i))));
    }
    Ok(match name {
        "chsh-quantum" => Model::Empirical(quantum_empirical_model(
            &Ket::phi_plus(),
            &chsh_measurements(),
            DEFAULT_MAX_DENOMINATOR,
        )?),
        "hardy" => Model::Empirical(quantum_empirical_model(
            &hardy_state(),
            &hardy_measurements(),
            DEFAULT_MAX_DENOMINATOR,
        )?),
        "specker-triangle" => Model::Empirical(specker_triangle()),
        "fuzzy-coin-property" => Model::Property(fuzzy_coin()),
        "psi-complete-chsh" => Model::Ontological(psi_complete_model(
            &[("φ+".to_string(), Ket::phi_plus())],
            &chsh_measurements(),
            DEFAULT_MAX_DENOMINATOR,
        )?),
        "pbr-q" => Model::Preparation(pbr_counterexample(q.unwrap_or(&default_q()))?),
        _ => return Err(ZooError::UnknownEntry(name.to_string())),
    })
}
