//! Full-reference fidelity metrics.
//!
//! Tier 1 (PSNR, SSIM, MS-SSIM, UQI, GSIM, WSNR, VIFp and the three norms) is
//! always compiled. Tier 2 (FSIM, FSIMc, VSI, NQM, VSNR, IFC, VIF, MAD) needs
//! the `tier2` feature and can additionally be switched off at run time
//! through [`Scorer::tier2_enabled`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::{norms, Error, Image, Result};

mod constants;
mod csf;
mod gsim;
mod psnr;
mod ssim;
mod uqi;
mod vifp;
mod wsnr;

#[cfg(feature = "tier2")]
mod color;
#[cfg(feature = "tier2")]
mod dwt;
#[cfg(feature = "tier2")]
mod fsim;
#[cfg(feature = "tier2")]
mod gsm;
#[cfg(feature = "tier2")]
mod log_gabor;
#[cfg(feature = "tier2")]
mod mad;
#[cfg(feature = "tier2")]
mod nqm;
#[cfg(feature = "tier2")]
mod steerable;
#[cfg(feature = "tier2")]
mod vsi;
#[cfg(feature = "tier2")]
mod vsnr;

pub use constants::*;
pub use csf::{mannos_sakrison, peak as csf_peak};
pub use gsim::{gsim, gsim_map};
pub use psnr::psnr;
pub use ssim::{ms_ssim, ssim, MsSsimResult};
pub use uqi::uqi;
pub use vifp::vifp;
pub use wsnr::{csf_weight, wsnr};

#[cfg(feature = "tier2")]
pub use fsim::{fsim, FsimResult};
#[cfg(feature = "tier2")]
pub use gsm::{ifc, vif};
#[cfg(feature = "tier2")]
pub use mad::{mad, MadResult};
#[cfg(feature = "tier2")]
pub use nqm::nqm;
#[cfg(feature = "tier2")]
pub use vsi::vsi;
#[cfg(feature = "tier2")]
pub use vsnr::vsnr;

/// Whether larger scores mean higher fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    HigherIsBetter,
    LowerIsBetter,
}

/// Every scored quantity: the fifteen fidelity metrics and three norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricId {
    Psnr,
    Ssim,
    MsSsim,
    Uqi,
    Gsim,
    Wsnr,
    Vifp,
    Fsim,
    Fsimc,
    Vsi,
    Nqm,
    Vsnr,
    Ifc,
    Vif,
    Mad,
    L0,
    L2,
    Linf,
}

impl MetricId {
    pub const ALL: [MetricId; 18] = [
        MetricId::Psnr,
        MetricId::Ssim,
        MetricId::MsSsim,
        MetricId::Uqi,
        MetricId::Gsim,
        MetricId::Wsnr,
        MetricId::Vifp,
        MetricId::Fsim,
        MetricId::Fsimc,
        MetricId::Vsi,
        MetricId::Nqm,
        MetricId::Vsnr,
        MetricId::Ifc,
        MetricId::Vif,
        MetricId::Mad,
        MetricId::L0,
        MetricId::L2,
        MetricId::Linf,
    ];

    /// Row order of the published performance table.
    pub const TABLE_ORDER: [MetricId; 18] = [
        MetricId::Ssim,
        MetricId::MsSsim,
        MetricId::Vsi,
        MetricId::Vif,
        MetricId::Vifp,
        MetricId::Mad,
        MetricId::Wsnr,
        MetricId::Fsim,
        MetricId::Fsimc,
        MetricId::Psnr,
        MetricId::Uqi,
        MetricId::Ifc,
        MetricId::Nqm,
        MetricId::Gsim,
        MetricId::Vsnr,
        MetricId::L0,
        MetricId::L2,
        MetricId::Linf,
    ];

    pub fn tier1() -> Vec<MetricId> {
        Self::ALL.into_iter().filter(|m| m.tier() == 1).collect()
    }

    pub fn tier2() -> Vec<MetricId> {
        Self::ALL.into_iter().filter(|m| m.tier() == 2).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricId::Psnr => "PSNR",
            MetricId::Ssim => "SSIM",
            MetricId::MsSsim => "MS-SSIM",
            MetricId::Uqi => "UQI",
            MetricId::Gsim => "GSIM",
            MetricId::Wsnr => "WSNR",
            MetricId::Vifp => "VIFp",
            MetricId::Fsim => "FSIM",
            MetricId::Fsimc => "FSIMc",
            MetricId::Vsi => "VSI",
            MetricId::Nqm => "NQM",
            MetricId::Vsnr => "VSNR",
            MetricId::Ifc => "IFC",
            MetricId::Vif => "VIF",
            MetricId::Mad => "MAD",
            MetricId::L0 => "L0",
            MetricId::L2 => "L2",
            MetricId::Linf => "Linf",
        }
    }

    pub fn tier(self) -> u8 {
        match self {
            MetricId::Psnr
            | MetricId::Ssim
            | MetricId::MsSsim
            | MetricId::Uqi
            | MetricId::Gsim
            | MetricId::Wsnr
            | MetricId::Vifp
            | MetricId::L0
            | MetricId::L2
            | MetricId::Linf => 1,
            _ => 2,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            MetricId::Mad | MetricId::L0 | MetricId::L2 | MetricId::Linf => Polarity::LowerIsBetter,
            _ => Polarity::HigherIsBetter,
        }
    }

    pub fn is_norm(self) -> bool {
        matches!(self, MetricId::L0 | MetricId::L2 | MetricId::Linf)
    }

    /// Score of an identical pair.
    pub fn perfect_value(self) -> ScoreValue {
        match self {
            MetricId::Psnr | MetricId::Wsnr | MetricId::Nqm | MetricId::Vsnr | MetricId::Ifc => {
                ScoreValue::UnboundedPerfect
            }
            MetricId::Mad | MetricId::L0 | MetricId::L2 | MetricId::Linf => ScoreValue::Finite(0.0),
            _ => ScoreValue::Finite(1.0),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let id = match key.as_str() {
            "psnr" => MetricId::Psnr,
            "ssim" => MetricId::Ssim,
            "msssim" => MetricId::MsSsim,
            "uqi" => MetricId::Uqi,
            "gsim" | "gsm" => MetricId::Gsim,
            "wsnr" => MetricId::Wsnr,
            "vifp" => MetricId::Vifp,
            "fsim" => MetricId::Fsim,
            "fsimc" => MetricId::Fsimc,
            "vsi" => MetricId::Vsi,
            "nqm" => MetricId::Nqm,
            "vsnr" => MetricId::Vsnr,
            "ifc" => MetricId::Ifc,
            "vif" => MetricId::Vif,
            "mad" => MetricId::Mad,
            "l0" => MetricId::L0,
            "l2" => MetricId::L2,
            "linf" | "l∞" | "linfinity" => MetricId::Linf,
            _ => return Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        };
        Ok(id)
    }
}

/// A metric value, or the marker for SNR-type metrics on distortion-free input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScoreValue {
    Finite(f64),
    UnboundedPerfect,
}

impl ScoreValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ScoreValue::Finite(v) => Some(v),
            ScoreValue::UnboundedPerfect => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, ScoreValue::UnboundedPerfect)
    }

    pub(crate) fn from_f64(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            Ok(ScoreValue::UnboundedPerfect)
        } else if v.is_finite() {
            Ok(ScoreValue::Finite(v))
        } else {
            Err(Error::Degenerate(format!("metric evaluated to {v}")))
        }
    }
}

impl fmt::Display for ScoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreValue::Finite(v) => write!(f, "{v}"),
            ScoreValue::UnboundedPerfect => f.write_str("inf"),
        }
    }
}

impl FromStr for ScoreValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "Inf" => Ok(ScoreValue::UnboundedPerfect),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ScoreValue::Finite)
                .ok_or_else(|| Error::InvalidArgument(format!("bad score value {s:?}"))),
        }
    }
}

impl Serialize for ScoreValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScoreValue::Finite(v) => s.serialize_f64(*v),
            ScoreValue::UnboundedPerfect => s.serialize_str("inf"),
        }
    }
}

/// One metric evaluated on one stimulus pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricScore {
    pub metric: MetricId,
    pub value: ScoreValue,
    pub pair_id: String,
    /// Set when the metric ran in a reduced configuration (e.g. fewer scales).
    pub note: Option<String>,
}

/// Per-metric outcome inside a batch; failures do not abort the batch.
#[derive(Debug)]
pub struct MetricOutcome {
    pub metric: MetricId,
    pub result: Result<MetricScore>,
}

/// Metric dispatcher bound to a constants table.
#[derive(Clone, Debug)]
pub struct Scorer {
    pub constants: Constants,
    pub tier2_enabled: bool,
}

impl Default for Scorer {
    fn default() -> Self {
        Self::new(Constants::default())
    }
}

impl Scorer {
    pub fn new(constants: Constants) -> Self {
        Self {
            constants,
            tier2_enabled: cfg!(feature = "tier2"),
        }
    }

    pub fn is_enabled(&self, metric: MetricId) -> bool {
        metric.tier() == 1 || (cfg!(feature = "tier2") && self.tier2_enabled)
    }

    /// Scores one metric on `(reference, distorted)`.
    pub fn score(
        &self,
        pair_id: &str,
        metric: MetricId,
        reference: &Image,
        distorted: &Image,
    ) -> Result<MetricScore> {
        if !self.is_enabled(metric) {
            return Err(Error::NotEnabled(metric));
        }
        reference.check_same_shape(distorted)?;
        let c = &self.constants;
        let mut note = None;
        let value = match metric {
            MetricId::Psnr => psnr(reference, distorted)?,
            MetricId::Ssim => ScoreValue::Finite(ssim(reference, distorted, c)?),
            MetricId::MsSsim => {
                let r = ms_ssim(reference, distorted, c)?;
                if r.scales < c.ms_ssim.weights.len() {
                    note = Some(format!("reduced to {} scales", r.scales));
                }
                ScoreValue::Finite(r.value)
            }
            MetricId::Uqi => ScoreValue::Finite(uqi(reference, distorted, c)?),
            MetricId::Gsim => ScoreValue::Finite(gsim(reference, distorted, c)?),
            MetricId::Wsnr => wsnr(reference, distorted, c)?,
            MetricId::Vifp => ScoreValue::Finite(vifp(reference, distorted, c)?),
            MetricId::L0 => {
                let n = if c.norms.l0_per_sample {
                    norms::l0_norm_samples(reference, distorted)?
                } else {
                    norms::l0_norm(reference, distorted)?
                };
                ScoreValue::Finite(n as f64)
            }
            MetricId::L2 => ScoreValue::Finite(norms::l2_norm(reference, distorted)?),
            MetricId::Linf => ScoreValue::Finite(norms::linf_norm(reference, distorted)?),
            _ => self.score_tier2(metric, reference, distorted)?,
        };
        Ok(MetricScore {
            metric,
            value,
            pair_id: pair_id.to_string(),
            note,
        })
    }

    #[cfg(feature = "tier2")]
    fn score_tier2(
        &self,
        metric: MetricId,
        reference: &Image,
        distorted: &Image,
    ) -> Result<ScoreValue> {
        let c = &self.constants;
        Ok(match metric {
            MetricId::Fsim => ScoreValue::Finite(fsim(reference, distorted, c)?.fsim),
            MetricId::Fsimc => ScoreValue::Finite(fsim(reference, distorted, c)?.fsimc),
            MetricId::Vsi => ScoreValue::Finite(vsi(reference, distorted, c)?),
            MetricId::Nqm => nqm(reference, distorted, c)?,
            MetricId::Vsnr => vsnr(reference, distorted, c)?,
            MetricId::Ifc => ifc(reference, distorted, c)?,
            MetricId::Vif => ScoreValue::Finite(vif(reference, distorted, c)?),
            MetricId::Mad => ScoreValue::Finite(mad(reference, distorted, c)?.value),
            tier1 => unreachable!("{tier1} is a tier-1 metric"),
        })
    }

    #[cfg(not(feature = "tier2"))]
    fn score_tier2(&self, metric: MetricId, _: &Image, _: &Image) -> Result<ScoreValue> {
        Err(Error::NotEnabled(metric))
    }

    /// Tier-2 entry point; rejects tier-1 ids and disabled metrics.
    pub fn compute_tier2(
        &self,
        pair_id: &str,
        metric: MetricId,
        reference: &Image,
        distorted: &Image,
    ) -> Result<MetricScore> {
        if metric.tier() != 2 {
            return Err(Error::InvalidArgument(format!(
                "{metric} is not a tier-2 metric"
            )));
        }
        self.score(pair_id, metric, reference, distorted)
    }

    /// Scores every requested metric (deduplicated, canonical order).
    pub fn score_all(
        &self,
        pair_id: &str,
        reference: &Image,
        distorted: &Image,
        metrics: &[MetricId],
    ) -> Result<Vec<MetricOutcome>> {
        if metrics.is_empty() {
            return Err(Error::InvalidArgument("empty metric set".into()));
        }
        let mut ids = metrics.to_vec();
        ids.sort();
        ids.dedup();
        Ok(ids
            .into_iter()
            .map(|metric| MetricOutcome {
                metric,
                result: self.score(pair_id, metric, reference, distorted),
            })
            .collect())
    }
}

/// [`Scorer::score_all`] with default constants.
pub fn score_all(
    pair_id: &str,
    reference: &Image,
    distorted: &Image,
    metrics: &[MetricId],
) -> Result<Vec<MetricOutcome>> {
    Scorer::default().score_all(pair_id, reference, distorted, metrics)
}

/// [`Scorer::compute_tier2`] with default constants.
pub fn compute_tier2(
    metric: MetricId,
    reference: &Image,
    distorted: &Image,
) -> Result<MetricScore> {
    Scorer::default().compute_tier2("", metric, reference, distorted)
}

/// `(2ab + c) / (a² + b² + c)`; exactly 1 when `a == b`.
#[inline]
pub(crate) fn similarity(a: f64, b: f64, c: f64) -> f64 {
    (2.0 * a * b + c) / (a * a + b * b + c)
}

/// Luminance planes of both images after the shape check.
pub(crate) fn luma_pair(
    reference: &Image,
    distorted: &Image,
) -> Result<(crate::LumaPlane, crate::LumaPlane)> {
    reference.check_same_shape(distorted)?;
    Ok((
        crate::image::to_luminance(reference)?,
        crate::image::to_luminance(distorted)?,
    ))
}
