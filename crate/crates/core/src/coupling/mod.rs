//! Attribute, method and control coupling between classes, and the stubbing
//! cost of a test order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eord::Eord;
use crate::model::{MemberKind, ProgramModel};

/// Coupling of `from` on `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub from: String,
    pub to: String,
    /// Distinct attributes of `to` accessed by `from`.
    #[serde(rename = "A")]
    pub a: u32,
    /// Distinct methods of `to` invoked by `from`.
    #[serde(rename = "M")]
    pub m: u32,
    /// Control complexity.
    #[serde(rename = "T")]
    pub t: f64,
    pub a_norm: f64,
    pub m_norm: f64,
}

impl CouplingRecord {
    pub fn new(from: &str, to: &str) -> Self {
        CouplingRecord {
            from: from.into(),
            to: to.into(),
            a: 0,
            m: 0,
            t: 0.0,
            a_norm: 0.0,
            m_norm: 0.0,
        }
    }

    pub fn scplx(&self, w: &Weights) -> f64 {
        scplx(self, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub wa: f64,
    pub wm: f64,
    pub wt: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            wa: 1.0 / 3.0,
            wm: 1.0 / 3.0,
            wt: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("weights must be nonnegative and sum to 1 (got {0}, {1}, {2})")]
    BadWeights(f64, f64, f64),
    #[error("order is not a permutation of the graph's classes: {0}")]
    NotAPermutation(String),
}

impl Weights {
    pub fn new(wa: f64, wm: f64, wt: f64) -> Result<Self, CouplingError> {
        let ok = [wa, wm, wt].iter().all(|w| w.is_finite() && *w >= 0.0)
            && ((wa + wm + wt) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(Weights { wa, wm, wt })
        } else {
            Err(CouplingError::BadWeights(wa, wm, wt))
        }
    }
}

impl std::str::FromStr for Weights {
    type Err = String;

    /// `wa,wm,wt`
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated weights, got `{s}`"));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| format!("bad weight `{p}`"))?;
        }
        Weights::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
    }
}

/// Records for every ordered class pair with at least one cross-class member
/// reference, sorted by pair. `t` is left at 0 and norms are filled in.
pub fn measure_data_coupling(model: &ProgramModel) -> Vec<CouplingRecord> {
    // (attributes, methods) referenced per class pair
    type Members<'m> = (BTreeSet<&'m str>, BTreeSet<&'m str>);
    let mut seen: BTreeMap<(&str, &str), Members> = BTreeMap::new();
    for c in &model.classes {
        for m in &c.methods {
            for s in m.body.statements() {
                let Some(site) = &s.call_site else { continue };
                if site.target_class == c.name {
                    continue;
                }
                let entry = seen.entry((&c.name, &site.target_class)).or_default();
                match site.member_kind {
                    MemberKind::Attribute => entry.0.insert(&site.target_member),
                    MemberKind::Method => entry.1.insert(&site.target_member),
                };
            }
        }
    }
    let mut records: Vec<CouplingRecord> = seen
        .into_iter()
        .map(|((from, to), (attrs, methods))| CouplingRecord {
            a: attrs.len() as u32,
            m: methods.len() as u32,
            ..CouplingRecord::new(from, to)
        })
        .collect();
    normalize(&mut records);
    records
}

/// Divides A and M by their system-wide maxima (0 when the maximum is 0).
pub fn normalize<'r>(records: impl IntoIterator<Item = &'r mut CouplingRecord>) {
    let records: Vec<&mut CouplingRecord> = records.into_iter().collect();
    let max_a = records.iter().map(|r| r.a).max().unwrap_or(0);
    let max_m = records.iter().map(|r| r.m).max().unwrap_or(0);
    for r in records {
        r.a_norm = if max_a == 0 {
            0.0
        } else {
            f64::from(r.a) / f64::from(max_a)
        };
        r.m_norm = if max_m == 0 {
            0.0
        } else {
            f64::from(r.m) / f64::from(max_m)
        };
    }
}

/// `sqrt(W_A·A_norm² + W_M·M_norm² + W_T·T²)`
pub fn scplx(rec: &CouplingRecord, w: &Weights) -> f64 {
    (w.wa * rec.a_norm * rec.a_norm + w.wm * rec.m_norm * rec.m_norm + w.wt * rec.t * rec.t).sqrt()
}

/// Edges `i -> j` whose source is integrated before its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StubSet {
    pub stubs: Vec<(String, String)>,
}

impl StubSet {
    pub fn len(&self) -> usize {
        self.stubs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stubs.is_empty()
    }

    pub fn contains(&self, from: &str, to: &str) -> bool {
        self.stubs.iter().any(|(f, t)| f == from && t == to)
    }
}

/// Position of each class in `order`, checking it is a permutation of the
/// graph's nodes.
pub fn positions<'o>(
    eord: &Eord,
    order: &'o [String],
) -> Result<HashMap<&'o str, usize>, CouplingError> {
    let pos: HashMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    if pos.len() != order.len() {
        return Err(CouplingError::NotAPermutation("duplicate class".into()));
    }
    if order.len() != eord.nodes.len() {
        return Err(CouplingError::NotAPermutation(format!(
            "{} classes given, graph has {}",
            order.len(),
            eord.nodes.len()
        )));
    }
    if let Some(missing) = eord.nodes.iter().find(|n| !pos.contains_key(n.as_str())) {
        return Err(CouplingError::NotAPermutation(format!(
            "`{missing}` missing"
        )));
    }
    Ok(pos)
}

pub fn stub_set(eord: &Eord, order: &[String]) -> Result<StubSet, CouplingError> {
    let pos = positions(eord, order)?;
    let stubs = eord
        .edges
        .iter()
        .filter(|e| pos[e.from.as_str()] < pos[e.to.as_str()])
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    Ok(StubSet { stubs })
}

/// Totals over the stubs an order needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OrderCost {
    #[serde(rename = "OCplx")]
    pub ocplx: f64,
    #[serde(rename = "ACplx")]
    pub acplx: u32,
    #[serde(rename = "MCplx")]
    pub mcplx: u32,
    #[serde(rename = "TCplx")]
    pub tcplx: f64,
    #[serde(rename = "Stubs")]
    pub stub_count: u32,
}

pub fn ocplx(eord: &Eord, order: &[String], w: &Weights) -> Result<OrderCost, CouplingError> {
    let pos = positions(eord, order)?;
    let mut cost = OrderCost::default();
    for e in &eord.edges {
        if pos[e.from.as_str()] < pos[e.to.as_str()] {
            cost.ocplx += scplx(&e.coupling, w);
            cost.acplx += e.coupling.a;
            cost.mcplx += e.coupling.m;
            cost.tcplx += e.coupling.t;
            cost.stub_count += 1;
        }
    }
    Ok(cost)
}
