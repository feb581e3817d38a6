//! JSON wire formats for systems, points, track results and discrete paths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmetric::{condition_length, DiscretePath, PathNode};
use crate::error::{Error, Result};
use crate::polysys::HomSystem;
use crate::projective::ProjPoint;
use crate::tracker::{step_bound, Homotopy, HomotopyKind, TrackFailure, TrackResult, TrackerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub degrees: Vec<u32>,
    pub equations: Vec<Vec<TermJson>>,
}

impl From<&HomSystem> for SystemJson {
    fn from(f: &HomSystem) -> Self {
        SystemJson {
            n: f.n(),
            degrees: f.degrees().to_vec(),
            equations: (0..f.n())
                .map(|i| {
                    f.terms(i)
                        .map(|(e, z)| TermJson {
                            exponents: e.to_vec(),
                            re: z.re,
                            im: z.im,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<&SystemJson> for HomSystem {
    type Error = Error;

    fn try_from(s: &SystemJson) -> Result<Self> {
        if s.n != s.degrees.len() || s.n != s.equations.len() {
            return Err(Error::InvalidSystem(format!(
                "n = {} but {} degrees and {} equations",
                s.n,
                s.degrees.len(),
                s.equations.len()
            )));
        }
        let equations = s
            .equations
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|t| (t.exponents.clone(), Complex64::new(t.re, t.im)))
                    .collect()
            })
            .collect();
        HomSystem::from_terms(s.degrees.clone(), equations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ProjPoint> for PointJson {
    fn from(x: &ProjPoint) -> Self {
        PointJson {
            re: x.as_slice().iter().map(|z| z.re).collect(),
            im: x.as_slice().iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<&PointJson> for ProjPoint {
    type Error = Error;

    fn try_from(p: &PointJson) -> Result<Self> {
        if p.re.len() != p.im.len() {
            return Err(Error::DimensionMismatch {
                expected: p.re.len(),
                found: p.im.len(),
            });
        }
        let v: Vec<Complex64> = p.re.iter().zip(&p.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        ProjPoint::from_slice(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyJson {
    pub kind: HomotopyKind,
    /// Start, intermediate waypoints, target.
    pub waypoints: Vec<SystemJson>,
}

impl From<&Homotopy> for HomotopyJson {
    fn from(h: &Homotopy) -> Self {
        HomotopyJson {
            kind: h.kind(),
            waypoints: h.waypoints().iter().map(SystemJson::from).collect(),
        }
    }
}

impl TryFrom<&HomotopyJson> for Homotopy {
    type Error = Error;

    fn try_from(h: &HomotopyJson) -> Result<Self> {
        let systems = h
            .waypoints
            .iter()
            .map(HomSystem::try_from)
            .collect::<Result<Vec<_>>>()?;
        match (h.kind, systems.as_slice()) {
            (HomotopyKind::GreatCircle, _) => Homotopy::polyline(&systems),
            (HomotopyKind::BwSegment, [a, b]) => Homotopy::new(a, b, HomotopyKind::BwSegment),
            (HomotopyKind::BwSegment, _) => Err(Error::InvalidPath(
                "a segment homotopy has exactly two waypoints".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackResultJson {
    pub success: bool,
    pub k: usize,
    pub subdivision: Vec<f64>,
    pub mu_profile: Vec<f64>,
    pub condition_integral: f64,
    pub corollary_integral: f64,
    pub final_point: PointJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    pub step_bound: u64,
    pub rejected_steps: usize,
    pub max_degree: u32,
    pub iterates: Vec<PointJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopyJson>,
}

impl TrackResultJson {
    pub fn new(res: &TrackResult, h: Option<&Homotopy>, cfg: &TrackerConfig) -> Self {
        TrackResultJson {
            success: res.success(),
            k: res.newton_steps,
            subdivision: res.subdivision.clone(),
            mu_profile: res.mu_profile.clone(),
            condition_integral: res.condition_integral,
            corollary_integral: res.corollary_integral,
            final_point: res.final_point().into(),
            failure_reason: res.failure_reason(),
            step_bound: step_bound(res.condition_integral, cfg, res.max_degree),
            rejected_steps: res.rejected_steps,
            max_degree: res.max_degree,
            iterates: res.iterates.iter().map(PointJson::from).collect(),
            homotopy: h.map(HomotopyJson::from),
        }
    }

    /// The result and, when recorded, its homotopy. A failure comes back as
    /// [`TrackFailure::Recorded`].
    pub fn to_result(&self) -> Result<(TrackResult, Option<Homotopy>)> {
        let iterates = self
            .iterates
            .iter()
            .map(ProjPoint::try_from)
            .collect::<Result<Vec<_>>>()?;
        if iterates.is_empty() {
            return Err(Error::InvalidPath("track result without iterates".into()));
        }
        let failure = match (self.success, &self.failure_reason) {
            (true, _) => None,
            (false, reason) => Some(TrackFailure::Recorded(
                reason.clone().unwrap_or_else(|| "unsuccessful track".into()),
            )),
        };
        let res = TrackResult {
            subdivision: self.subdivision.clone(),
            iterates,
            mu_profile: self.mu_profile.clone(),
            newton_steps: self.k,
            condition_integral: self.condition_integral,
            corollary_integral: self.corollary_integral,
            rejected_steps: self.rejected_steps,
            max_degree: self.max_degree,
            failure,
        };
        let h = self.homotopy.as_ref().map(Homotopy::try_from).transpose()?;
        Ok((res, h))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub system: SystemJson,
    pub zeta: PointJson,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub nodes: Vec<NodeJson>,
    pub length: f64,
}

impl PathJson {
    pub fn new(p: &DiscretePath) -> Result<Self> {
        Ok(PathJson {
            nodes: p
                .nodes
                .iter()
                .map(|n| NodeJson {
                    system: (&n.system).into(),
                    zeta: (&n.zeta).into(),
                    mu: n.mu,
                })
                .collect(),
            length: condition_length(p)?,
        })
    }

    /// Rebuilds the path. Systems are renormalized and `mu` is recomputed,
    /// so a stale cache in the file cannot leak into lengths.
    pub fn to_path(&self) -> Result<DiscretePath> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| PathNode::new(&HomSystem::try_from(&n.system)?, ProjPoint::try_from(&n.zeta)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscretePath::new(nodes))
    }
}
