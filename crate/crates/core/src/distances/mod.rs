//! Wasserstein and bottleneck distances between persistence diagrams.
//!
//! Both diagrams are augmented with the diagonal projections of the other's
//! points, so that a point may be matched either to a point of the other
//! diagram or to the diagonal. Plane distances use the `q`-norm; the
//! Wasserstein aggregate uses exponent `p`.

mod assignment;
mod matching;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use assignment::min_cost_assignment;
pub use matching::max_matching;

use crate::diagram::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};

/// Treatment of infinite-death pairs before matching.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialPolicy {
    #[default]
    Drop,
    /// Replace infinite deaths by this value.
    Cap(f64),
}

impl std::str::FromStr for EssentialPolicy {
    type Err = Error;

    /// `drop` or `cap=<value>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "drop" {
            return Ok(Self::Drop);
        }
        if let Some(v) = s.strip_prefix("cap=") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad cap value in {s:?}")))?;
            if v.is_finite() {
                return Ok(Self::Cap(v));
            }
        }
        Err(Error::InvalidArgument(format!("essential policy must be `drop` or `cap=V`, got {s:?}")))
    }
}

/// `p` is the matching exponent (`f64::INFINITY` gives the bottleneck
/// distance), `q` the ground norm on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinParams {
    #[serde(serialize_with = "ser_exponent", deserialize_with = "de_exponent")]
    pub p: f64,
    #[serde(serialize_with = "ser_exponent", deserialize_with = "de_exponent")]
    pub q: f64,
    pub essential_policy: EssentialPolicy,
}

fn ser_exponent<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_exponent<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Exp {
        Num(f64),
        Text(String),
    }
    match Exp::deserialize(d)? {
        Exp::Num(v) => Ok(v),
        Exp::Text(t) => parse_exponent(&t).map_err(serde::de::Error::custom),
    }
}

/// Parse an exponent: a number or `inf`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    let v = match s {
        "inf" | "infinity" => f64::INFINITY,
        other => other
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad exponent {other:?}")))?,
    };
    if v >= 1.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("exponent must be >= 1, got {s}")))
    }
}

impl Default for WassersteinParams {
    fn default() -> Self {
        Self {
            p: 2.0,
            q: f64::INFINITY,
            essential_policy: EssentialPolicy::Drop,
        }
    }
}

impl WassersteinParams {
    pub fn new(p: f64, q: f64, essential_policy: EssentialPolicy) -> Result<Self> {
        let params = Self { p, q, essential_policy };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !(self.q >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need p >= 1 and q >= 1, got p={} q={}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// `q`-norm distance between two plane points.
pub fn ground_distance(a: PersistencePair, b: PersistencePair, q: f64) -> f64 {
    let db = (a.birth - b.birth).abs();
    let dd = (a.death - b.death).abs();
    if q.is_infinite() {
        db.max(dd)
    } else if q == 1.0 {
        db + dd
    } else {
        (db.powf(q) + dd.powf(q)).powf(1.0 / q)
    }
}

/// `q`-norm distance from a point to its orthogonal projection on the diagonal.
pub fn diagonal_distance(a: PersistencePair, q: f64) -> f64 {
    let half = (a.death - a.birth).abs() / 2.0;
    if q.is_infinite() {
        half
    } else if q == 1.0 {
        2.0 * half
    } else {
        half * 2f64.powf(1.0 / q)
    }
}

/// Apply the essential policy and drop zero-persistence points; the result is
/// sorted so that distance computations are order independent.
fn prepare(d: &PersistenceDiagram, policy: EssentialPolicy) -> Result<Vec<PersistencePair>> {
    d.validate()?;
    let mut out = Vec::with_capacity(d.len());
    for &pair in &d.pairs {
        let pair = match policy {
            EssentialPolicy::Drop if pair.is_essential() => continue,
            EssentialPolicy::Drop => pair,
            EssentialPolicy::Cap(cap) => {
                if pair.birth > cap || (!pair.is_essential() && pair.death > cap) {
                    return Err(Error::ExceedsCap {
                        birth: pair.birth,
                        death: pair.death,
                        cap,
                    });
                }
                if pair.is_essential() {
                    PersistencePair::new(pair.birth, cap)
                } else {
                    pair
                }
            }
        };
        if pair.birth != pair.death {
            out.push(pair);
        }
    }
    out.sort_by(PersistencePair::total_cmp);
    Ok(out)
}

fn canonical<'a>(a: &'a [PersistencePair], b: &'a [PersistencePair]) -> (&'a [PersistencePair], &'a [PersistencePair]) {
    let ord = a
        .len()
        .cmp(&b.len())
        .then_with(|| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// Unpowered cost matrix of the augmented problem, row-major `(n+m)^2`.
fn augmented_costs(a: &[PersistencePair], b: &[PersistencePair], q: f64) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut cost = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            cost[i * size + j] = match (i < n, j < m) {
                (true, true) => ground_distance(a[i], b[j], q),
                (true, false) => diagonal_distance(a[i], q),
                (false, true) => diagonal_distance(b[j], q),
                (false, false) => 0.0,
            };
        }
    }
    cost
}

fn check_dims(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if d1.dimension != d2.dimension {
        return Err(Error::DimensionMismatch(d1.dimension, d2.dimension));
    }
    Ok(())
}

/// Exact `W_{q,p}` distance. With `p = inf` this is the bottleneck distance.
pub fn wasserstein_distance(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    params: &WassersteinParams,
) -> Result<f64> {
    params.validate()?;
    check_dims(d1, d2)?;
    let a = prepare(d1, params.essential_policy)?;
    let b = prepare(d2, params.essential_policy)?;
    let (a, b) = canonical(&a, &b);
    if params.p.is_infinite() {
        return Ok(bottleneck_prepared(a, b, params.q));
    }
    let size = a.len() + b.len();
    let p = params.p;
    let mut cost = augmented_costs(a, b, params.q);
    if p != 1.0 {
        for c in &mut cost {
            *c = c.powf(p);
        }
    }
    let assign = min_cost_assignment(&cost, size);
    let mut terms: Vec<f64> = assign.iter().enumerate().map(|(r, &c)| cost[r * size + c]).collect();
    terms.sort_by(f64::total_cmp);
    let total: f64 = terms.iter().sum();
    Ok(if p == 1.0 { total } else { total.powf(1.0 / p) })
}

/// Bottleneck distance with ground norm `q`, essential pairs dropped.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, q: f64) -> Result<f64> {
    bottleneck_distance_with(d1, d2, q, EssentialPolicy::Drop)
}

pub fn bottleneck_distance_with(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    q: f64,
    policy: EssentialPolicy,
) -> Result<f64> {
    check_dims(d1, d2)?;
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("q must be >= 1, got {q}")));
    }
    let a = prepare(d1, policy)?;
    let b = prepare(d2, policy)?;
    let (a, b) = canonical(&a, &b);
    Ok(bottleneck_prepared(a, b, q))
}

/// Smallest candidate cost admitting a perfect matching, by binary search.
fn bottleneck_prepared(a: &[PersistencePair], b: &[PersistencePair], q: f64) -> f64 {
    let size = a.len() + b.len();
    if size == 0 {
        return 0.0;
    }
    let cost = augmented_costs(a, b, q);
    let mut candidates = cost.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let feasible = |t: f64| max_matching(size, &|r, c| cost[r * size + c] <= t) == size;
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}
