//! Canonical constants for every metric, serializable for provenance and
//! overridable by dotted key (`ssim.k1 = 0.01`).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::image::GradientOperator;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub viewing: Viewing,
    pub norms: NormConstants,
    pub ssim: SsimConstants,
    pub ms_ssim: MsSsimConstants,
    pub uqi: UqiConstants,
    pub gsim: GsimConstants,
    pub wsnr: WsnrConstants,
    pub vifp: VifpConstants,
    pub fsim: FsimConstants,
    pub vsi: VsiConstants,
    pub nqm: NqmConstants,
    pub vsnr: VsnrConstants,
    pub vif: GsmPyramidConstants,
    pub ifc: GsmPyramidConstants,
    pub mad: MadConstants,
}

/// Display geometry shared by the CSF-weighted metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Viewing {
    /// Viewing distance in multiples of the display height.
    pub distance_heights: f64,
    /// Display height in pixels.
    pub display_height_px: f64,
}

impl Viewing {
    pub fn pixels_per_degree(&self) -> f64 {
        self.distance_heights * self.display_height_px * std::f64::consts::PI / 180.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConstants {
    /// Count altered samples instead of altered pixels for L0.
    pub l0_per_sample: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsimConstants {
    pub k1: f64,
    pub k2: f64,
    pub window: usize,
    pub sigma: f64,
    pub dynamic_range: f64,
}

impl SsimConstants {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsSsimConstants {
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UqiConstants {
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsimConstants {
    /// Stabilizer of the gradient similarity, for unit-gain gradients.
    pub c: f64,
    /// Stabilizer of the local-mean luminance similarity.
    pub luminance_c: f64,
    /// Side of the box window for local means.
    pub luminance_window: usize,
    pub operator: GradientOperator,
    /// Recorded construction: gradient similarity times luminance similarity.
    pub variant: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsnrConstants {
    /// Mannos–Sakrison CSF parameters: a·(b + c·f)·exp(−(c·f)^d).
    pub csf: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VifpConstants {
    pub sigma_nsq: f64,
    pub scales: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsimConstants {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub lambda: f64,
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
    pub noise_k: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsiConstants {
    pub c_vs: f64,
    pub c_gm: f64,
    pub c_chroma: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma_f: f64,
    pub omega0: f64,
    pub sigma_d: f64,
    pub sigma_c: f64,
    /// Side of the square working raster for saliency.
    pub saliency_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NqmConstants {
    /// Number of band-pass channels of the contrast pyramid.
    pub bands: usize,
    /// Peak contrast sensitivity (inverse of the lowest threshold).
    pub peak_sensitivity: f64,
    /// Exponent of the contrast-masking threshold elevation.
    pub masking_exponent: f64,
    /// Floor on the local mean luminance used as contrast denominator.
    pub luminance_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsnrConstants {
    pub alpha: f64,
    pub b: f64,
    pub k: f64,
    pub gamma: f64,
    pub levels: usize,
    /// Peak contrast sensitivity of the unmasked detection threshold.
    pub peak_sensitivity: f64,
    /// Exponent of masking-induced threshold elevation.
    pub masking_exponent: f64,
    /// Frequency exponent of the global-precedence contrast allocation.
    pub precedence_exponent: f64,
}

/// Steerable-pyramid Gaussian-scale-mixture parameters (VIF and IFC).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmPyramidConstants {
    pub levels: usize,
    pub orientations: usize,
    /// Orientation indices used at every level.
    pub used_orientations: Vec<usize>,
    /// Side of the vector neighbourhood (M × M).
    pub block: usize,
    /// Visual noise variance (VIF only; IFC ignores it).
    pub sigma_nsq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadConstants {
    pub beta1: f64,
    pub beta2: f64,
    pub block: usize,
    pub stride: usize,
    pub scale_weights: Vec<f64>,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
    /// Radial frequency (cycles/degree) mapped to the Nyquist limit.
    pub csf_nyquist_cpd: f64,
    /// Log-contrast floor of the visibility map.
    pub delta: f64,
    pub k: f64,
    pub gamma: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            viewing: Viewing {
                distance_heights: 7.0,
                display_height_px: 1080.0,
            },
            norms: NormConstants {
                l0_per_sample: false,
            },
            ssim: SsimConstants {
                k1: 0.01,
                k2: 0.03,
                window: 11,
                sigma: 1.5,
                dynamic_range: 255.0,
            },
            ms_ssim: MsSsimConstants {
                weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
            },
            uqi: UqiConstants { window: 8 },
            gsim: GsimConstants {
                c: 170.0,
                luminance_c: (0.01f64 * 255.0).powi(2),
                luminance_window: 3,
                operator: GradientOperator::Sobel,
                variant: "gradient-x-luminance".into(),
            },
            wsnr: WsnrConstants {
                csf: [2.6, 0.0192, 0.114, 1.1],
            },
            vifp: VifpConstants {
                sigma_nsq: 2.0,
                scales: 4,
            },
            fsim: FsimConstants {
                t1: 0.85,
                t2: 160.0,
                t3: 200.0,
                t4: 200.0,
                lambda: 0.03,
                scales: 4,
                orientations: 4,
                min_wavelength: 6.0,
                mult: 2.0,
                sigma_on_f: 0.55,
                d_theta_on_sigma: 1.2,
                noise_k: 2.0,
                epsilon: 1e-4,
            },
            vsi: VsiConstants {
                c_vs: 1.27,
                c_gm: 386.0,
                c_chroma: 130.0,
                alpha: 0.40,
                lambda: 0.020,
                sigma_f: 1.34,
                omega0: 0.021,
                sigma_d: 145.0,
                sigma_c: 0.001,
                saliency_size: 256,
            },
            nqm: NqmConstants {
                bands: 5,
                peak_sensitivity: 200.0,
                masking_exponent: 0.7,
                luminance_floor: 1.0,
            },
            vsnr: VsnrConstants {
                alpha: 0.04,
                b: 0.0,
                k: 0.02874,
                gamma: 2.2,
                levels: 5,
                peak_sensitivity: 200.0,
                masking_exponent: 0.7,
                precedence_exponent: 0.5,
            },
            vif: GsmPyramidConstants {
                levels: 4,
                orientations: 6,
                used_orientations: vec![2, 5],
                block: 3,
                sigma_nsq: 0.4,
            },
            ifc: GsmPyramidConstants {
                levels: 4,
                orientations: 6,
                used_orientations: vec![2, 5],
                block: 3,
                sigma_nsq: 0.0,
            },
            mad: MadConstants {
                beta1: 0.467,
                beta2: 0.130,
                block: 16,
                stride: 4,
                scale_weights: vec![0.5, 0.75, 1.0, 5.0, 6.0],
                orientations: 4,
                min_wavelength: 3.0,
                mult: 3.0,
                sigma_on_f: 0.55,
                d_theta_on_sigma: 1.5,
                csf_nyquist_cpd: 32.0,
                delta: -5.0,
                k: 0.02874,
                gamma: 2.2,
            },
        }
    }
}

impl Constants {
    /// Canonical JSON rendering, stable across runs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("constants serialize")
    }

    /// Overrides one constant by dotted path, e.g. `"fsim.t2"` or
    /// `"ms_ssim.weights"` (JSON array literal). The value is parsed as JSON
    /// and falls back to a plain string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut tree = serde_json::to_value(&*self).expect("constants serialize");
        let pointer = format!("/{}", key.replace('.', "/"));
        let slot = tree
            .pointer_mut(&pointer)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown constant {key:?}")))?;
        *slot = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        *self = serde_json::from_value(tree)
            .map_err(|e| Error::InvalidArgument(format!("bad value for {key:?}: {e}")))?;
        Ok(())
    }
}
