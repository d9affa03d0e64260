//! Multi-site preparation scenarios.
//!
//! Each site is prepared independently from its own finite menu, and a
//! preparation model assigns to every joint preparation a distribution over
//! joint ontic states. This mirrors measurement scenarios with preparations in
//! place of measurements and ontic states in place of outcomes;
//! [`to_measurement_form`] makes the dictionary explicit.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ontomodel::single_preparation;
use crate::probcore::{
    check_label, product_all, Assignment, Context, Dist, EmpiricalModel, Label, MeasurementScenario, ProbError,
};
use crate::rational::{ratio, ser, Rational};

pub const DELTA: &str = "Δ";
pub const REST: &str = "Λ−Δ";
pub const PSI0: &str = "ψ0";
pub const PSI1: &str = "ψ1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrepError {
    #[error("scenario has no sites")]
    NoSites,
    #[error("site {0} listed twice")]
    DuplicateSite(String),
    #[error("site {site}: {what} is empty")]
    EmptySite { site: String, what: &'static str },
    #[error("site {site}: {label} listed twice")]
    DuplicateLabel { site: String, label: String },
    #[error("no data for site {0}")]
    MissingSite(String),
    #[error("unknown site {0}")]
    UnknownSite(String),
    #[error("no table for joint preparation {0}")]
    MissingTable(String),
    #[error("table for {0}, which is not a joint preparation")]
    UnexpectedTable(String),
    #[error("joint preparation {preparation} weights {state}, which is not a joint ontic state")]
    UnknownState { preparation: String, state: String },
    #[error("q = {0} is outside (0, 1/2]")]
    QOutOfRange(Rational),
    #[error("bad region: {0}")]
    BadRegion(String),
    #[error("site {site}: distribution for {preparation} is missing or off the ontic space")]
    BadSiteModel { site: String, preparation: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

fn join(labels: &[Label]) -> String {
    labels.join(",")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreparationScenario {
    sites: Vec<Label>,
    preparations: BTreeMap<Label, Vec<Label>>,
    ontic_spaces: BTreeMap<Label, Vec<Label>>,
}

impl PreparationScenario {
    pub fn new(
        sites: Vec<Label>,
        preparations: BTreeMap<Label, Vec<Label>>,
        ontic_spaces: BTreeMap<Label, Vec<Label>>,
    ) -> Result<Self, PrepError> {
        if sites.is_empty() {
            return Err(PrepError::NoSites);
        }
        let mut seen = BTreeSet::new();
        for s in &sites {
            check_label(s)?;
            if !seen.insert(s) {
                return Err(PrepError::DuplicateSite(s.clone()));
            }
            for (what, map) in [("preparations", &preparations), ("ontic space", &ontic_spaces)] {
                let list = map.get(s).ok_or_else(|| PrepError::MissingSite(s.clone()))?;
                if list.is_empty() {
                    return Err(PrepError::EmptySite { site: s.clone(), what });
                }
                let mut labels = BTreeSet::new();
                for l in list {
                    check_label(l)?;
                    if !labels.insert(l) {
                        return Err(PrepError::DuplicateLabel {
                            site: s.clone(),
                            label: l.clone(),
                        });
                    }
                }
            }
        }
        if let Some(s) = preparations
            .keys()
            .chain(ontic_spaces.keys())
            .find(|s| !seen.contains(s))
        {
            return Err(PrepError::UnknownSite(s.clone()));
        }
        Ok(PreparationScenario {
            sites,
            preparations,
            ontic_spaces,
        })
    }

    pub fn sites(&self) -> &[Label] {
        &self.sites
    }

    pub fn preparations(&self, site: &str) -> Option<&[Label]> {
        self.preparations.get(site).map(Vec::as_slice)
    }

    pub fn ontic_space(&self, site: &str) -> Option<&[Label]> {
        self.ontic_spaces.get(site).map(Vec::as_slice)
    }

    pub fn preparation_map(&self) -> &BTreeMap<Label, Vec<Label>> {
        &self.preparations
    }

    pub fn ontic_space_map(&self) -> &BTreeMap<Label, Vec<Label>> {
        &self.ontic_spaces
    }

    fn tuples(&self, per_site: &BTreeMap<Label, Vec<Label>>) -> Vec<Vec<Label>> {
        let mut out = vec![Vec::new()];
        for s in &self.sites {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    per_site[s].iter().map(move |l| {
                        let mut t = prefix.clone();
                        t.push(l.clone());
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Every choice of one preparation per site, in declared order with the
    /// last site varying fastest.
    pub fn joint_preparations(&self) -> Vec<Vec<Label>> {
        self.tuples(&self.preparations)
    }

    pub fn joint_states(&self) -> Vec<Vec<Label>> {
        self.tuples(&self.ontic_spaces)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationModel {
    scenario: PreparationScenario,
    tables: BTreeMap<Vec<Label>, Dist<Vec<Label>>>,
}

impl PreparationModel {
    pub fn new(
        scenario: PreparationScenario,
        tables: BTreeMap<Vec<Label>, Dist<Vec<Label>>>,
    ) -> Result<Self, PrepError> {
        let joints = scenario.joint_preparations();
        for jp in &joints {
            let t = tables.get(jp).ok_or_else(|| PrepError::MissingTable(join(jp)))?;
            for st in t.support() {
                let ok = st.len() == scenario.sites.len()
                    && scenario
                        .sites
                        .iter()
                        .zip(st)
                        .all(|(s, l)| scenario.ontic_spaces[s].contains(l));
                if !ok {
                    return Err(PrepError::UnknownState {
                        preparation: join(jp),
                        state: join(st),
                    });
                }
            }
        }
        if tables.len() != joints.len() {
            let extra = tables.keys().find(|k| !joints.contains(k)).expect("extra key");
            return Err(PrepError::UnexpectedTable(join(extra)));
        }
        Ok(PreparationModel { scenario, tables })
    }

    pub fn scenario(&self) -> &PreparationScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &BTreeMap<Vec<Label>, Dist<Vec<Label>>> {
        &self.tables
    }

    pub fn table(&self, joint: &[Label]) -> Option<&Dist<Vec<Label>>> {
        self.tables.get(joint)
    }

    fn site_marginal(&self, joint: &[Label], idx: usize) -> Dist<Label> {
        self.tables[joint].map(|st| st[idx].clone())
    }
}

impl Serialize for PreparationModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let tables: BTreeMap<String, BTreeMap<String, String>> = self
            .tables
            .iter()
            .map(|(jp, d)| (join(jp), d.iter().map(|(st, w)| (join(st), w.to_string())).collect()))
            .collect();
        let mut st = s.serialize_struct("PreparationModel", 4)?;
        st.serialize_field("sites", &self.scenario.sites)?;
        st.serialize_field("preparations", &self.scenario.preparations)?;
        st.serialize_field("ontic_spaces", &self.scenario.ontic_spaces)?;
        st.serialize_field("tables", &tables)?;
        st.end()
    }
}

/// A site whose marginal depends on what the other sites were prepared in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreparationSignalling {
    pub site: Label,
    pub preparation: Label,
    pub joint_preparations: (Vec<Label>, Vec<Label>),
    pub marginals: (Dist<Label>, Dist<Label>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum IndependenceFailure {
    Signalling(PreparationSignalling),
    NotFactorizable {
        joint_preparation: Vec<Label>,
        joint_state: Vec<Label>,
        #[serde(serialize_with = "ser::rational")]
        actual: Rational,
        #[serde(serialize_with = "ser::rational")]
        product: Rational,
    },
}

pub fn is_no_preparation_signalling(m: &PreparationModel) -> Result<(), PreparationSignalling> {
    let joints = m.scenario.joint_preparations();
    for (idx, site) in m.scenario.sites.iter().enumerate() {
        for p in &m.scenario.preparations[site] {
            let mut first: Option<(&Vec<Label>, Dist<Label>)> = None;
            for jp in joints.iter().filter(|jp| jp[idx] == *p) {
                let marg = m.site_marginal(jp, idx);
                match &first {
                    None => first = Some((jp, marg)),
                    Some((j0, m0)) if *m0 != marg => {
                        return Err(PreparationSignalling {
                            site: site.clone(),
                            preparation: p.clone(),
                            joint_preparations: ((*j0).clone(), jp.clone()),
                            marginals: (m0.clone(), marg),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(())
}

/// Every joint table is the product of its site marginals. Signalling models
/// fail with the signalling witness, since their marginals are not well
/// defined.
pub fn is_preparation_independent(m: &PreparationModel) -> Result<(), IndependenceFailure> {
    is_no_preparation_signalling(m).map_err(IndependenceFailure::Signalling)?;
    let states = m.scenario.joint_states();
    for jp in m.scenario.joint_preparations() {
        let margs: Vec<Dist<Label>> = (0..jp.len()).map(|i| m.site_marginal(&jp, i)).collect();
        let table = &m.tables[&jp];
        for st in &states {
            let product: Rational = st.iter().zip(&margs).map(|(l, d)| d.weight(l)).product();
            let actual = table.weight(st);
            if actual != product {
                return Err(IndependenceFailure::NotFactorizable {
                    joint_preparation: jp,
                    joint_state: st.clone(),
                    actual,
                    product,
                });
            }
        }
    }
    Ok(())
}

/// Probability, for each joint preparation, that every site's ontic state
/// lies in that site's region.
pub fn overlap_event_probability(
    m: &PreparationModel,
    regions: &BTreeMap<Label, Vec<Label>>,
) -> Result<BTreeMap<Vec<Label>, Rational>, PrepError> {
    let sc = &m.scenario;
    if let Some(s) = regions.keys().find(|s| !sc.sites.contains(s)) {
        return Err(PrepError::BadRegion(format!("unknown site {s}")));
    }
    let mut sets = Vec::new();
    for s in &sc.sites {
        let r = regions
            .get(s)
            .ok_or_else(|| PrepError::BadRegion(format!("no region for site {s}")))?;
        if r.is_empty() {
            return Err(PrepError::BadRegion(format!("empty region for site {s}")));
        }
        if let Some(l) = r.iter().find(|l| !sc.ontic_spaces[s].contains(l)) {
            return Err(PrepError::BadRegion(format!("{l} is not an ontic state of site {s}")));
        }
        sets.push(r.iter().collect::<BTreeSet<_>>());
    }
    Ok(m.tables
        .iter()
        .map(|(jp, d)| {
            let mass = d.mass(|st| st.iter().zip(&sets).all(|(l, set)| set.contains(l)));
            (jp.clone(), mass)
        })
        .collect())
}

/// Per-site preparation distributions over the site's ontic space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteModel {
    pub ontic_space: Vec<Label>,
    pub preparations: Vec<(Label, Dist<Label>)>,
}

pub fn product_preparation_model(sites: &[(Label, SiteModel)]) -> Result<PreparationModel, PrepError> {
    let names: Vec<Label> = sites.iter().map(|(s, _)| s.clone()).collect();
    let preparations = sites
        .iter()
        .map(|(s, sm)| (s.clone(), sm.preparations.iter().map(|(p, _)| p.clone()).collect()))
        .collect();
    let ontic_spaces = sites
        .iter()
        .map(|(s, sm)| (s.clone(), sm.ontic_space.clone()))
        .collect();
    let scenario = PreparationScenario::new(names, preparations, ontic_spaces)?;
    let mut tables = BTreeMap::new();
    for jp in scenario.joint_preparations() {
        let factors: Vec<Dist<Label>> = sites
            .iter()
            .zip(&jp)
            .map(|((s, sm), p)| {
                sm.preparations
                    .iter()
                    .find(|(q, _)| q == p)
                    .map(|(_, d)| d.clone())
                    .ok_or_else(|| PrepError::BadSiteModel {
                        site: s.clone(),
                        preparation: p.clone(),
                    })
            })
            .collect::<Result<_, _>>()?;
        tables.insert(jp, product_all(&factors));
    }
    PreparationModel::new(scenario, tables)
}

/// Two-site model in which both sites have Δ-mass `q` under every joint
/// preparation, yet the joint state never lies in (Δ, Δ).
///
/// `q` stands for the smaller of the two preparations' masses on the region Δ
/// where their ontic distributions overlap. Ontic spaces are coarse-grained to
/// `{Δ, Λ−Δ}`.
pub fn pbr_counterexample(q: &Rational) -> Result<PreparationModel, PrepError> {
    if !q.is_positive() || *q > ratio(1, 2) {
        return Err(PrepError::QOutOfRange(q.clone()));
    }
    let sites = vec!["A".to_string(), "B".to_string()];
    let preps: Vec<Label> = vec![PSI0.into(), PSI1.into()];
    let space: Vec<Label> = vec![DELTA.into(), REST.into()];
    let scenario = PreparationScenario::new(
        sites.clone(),
        sites.iter().map(|s| (s.clone(), preps.clone())).collect(),
        sites.iter().map(|s| (s.clone(), space.clone())).collect(),
    )?;
    let one = Rational::one();
    let cells = [
        (vec![DELTA, DELTA], Rational::zero()),
        (vec![DELTA, REST], q.clone()),
        (vec![REST, DELTA], q.clone()),
        (vec![REST, REST], &one - q - q),
    ];
    let table = Dist::new(
        cells
            .iter()
            .map(|(st, w)| (st.iter().map(|l| l.to_string()).collect::<Vec<_>>(), w.clone())),
    )?;
    let tables = scenario
        .joint_preparations()
        .into_iter()
        .map(|jp| (jp, table.clone()))
        .collect();
    PreparationModel::new(scenario, tables)
}

/// The same data as a measurement scenario: each `site:preparation` becomes a
/// measurement with the site's ontic states as outcomes, and each joint
/// preparation becomes a context.
pub fn to_measurement_form(m: &PreparationModel) -> Result<EmpiricalModel, PrepError> {
    let sc = &m.scenario;
    let name = |s: &str, p: &str| format!("{s}:{p}");
    let mut outcomes = BTreeMap::new();
    for s in &sc.sites {
        for p in &sc.preparations[s] {
            outcomes.insert(name(s, p), sc.ontic_spaces[s].clone());
        }
    }
    let mut cover = Vec::new();
    let mut tables = BTreeMap::new();
    for jp in sc.joint_preparations() {
        let ms: Vec<String> = sc.sites.iter().zip(&jp).map(|(s, p)| name(s, p)).collect();
        let ctx = Context::new(ms.clone())?;
        let d = m.tables[&jp]
            .map(|st| Assignment::new(ms.iter().cloned().zip(st.iter().cloned())).expect("labels checked"));
        cover.push(ctx.clone());
        tables.insert(ctx, d);
    }
    let scenario = MeasurementScenario::new(outcomes, cover)?;
    Ok(EmpiricalModel::new(scenario, tables)?)
}

/// Factorization of the measurement form, checked by the ontological-model
/// machinery on a single ontic state.
pub fn measurement_form_factorizes(e: &EmpiricalModel) -> bool {
    let h = single_preparation(
        e.scenario().clone(),
        Dist::delta("λ".to_string()),
        vec!["λ".to_string()],
        |_, ctx, ev| e.entry(ctx, ev),
    )
    .expect("tables are valid distributions");
    crate::ontomodel::is_parameter_independent(&h).is_ok() && crate::ontomodel::factorizes(&h).is_ok()
}
