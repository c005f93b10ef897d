use crate::{Error, Result};

use super::{convolve, BorderMode, Kernel2D, LumaPlane};

/// 3×3 first-derivative operator used for gradient magnitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientOperator {
    #[default]
    Sobel,
    Scharr,
    Prewitt,
}

impl GradientOperator {
    /// Smoothing taps (across the derivative direction) and derivative taps.
    fn taps(self) -> ([f64; 3], [f64; 3]) {
        let smooth = match self {
            GradientOperator::Sobel => [1.0, 2.0, 1.0],
            GradientOperator::Scharr => [3.0, 10.0, 3.0],
            GradientOperator::Prewitt => [1.0, 1.0, 1.0],
        };
        (smooth, [-1.0, 0.0, 1.0])
    }

    /// Horizontal-derivative kernel (responds to vertical edges).
    pub fn kernel_x(self) -> Kernel2D {
        let (s, d) = self.taps();
        Kernel2D::separable(s.to_vec(), d.to_vec()).expect("3x3 kernel")
    }

    pub fn kernel_y(self) -> Kernel2D {
        self.kernel_x().transpose()
    }
}

/// Per-pixel `sqrt(Gx² + Gy²)` with unnormalized taps and symmetric borders.
pub fn gradient_magnitude(plane: &LumaPlane, op: GradientOperator) -> Result<LumaPlane> {
    if plane.width() < 3 || plane.height() < 3 {
        return Err(Error::TooSmall(format!(
            "gradient needs at least 3x3, got {}x{}",
            plane.width(),
            plane.height()
        )));
    }
    let gx = convolve(plane, &op.kernel_x(), BorderMode::Symmetric)?;
    let gy = convolve(plane, &op.kernel_y(), BorderMode::Symmetric)?;
    Ok(gx.zip_map(&gy, f64::hypot))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_gradient() {
        let p = LumaPlane::constant(6, 5, 80.0);
        for op in [
            GradientOperator::Sobel,
            GradientOperator::Scharr,
            GradientOperator::Prewitt,
        ] {
            assert!(gradient_magnitude(&p, op)
                .unwrap()
                .data()
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn sobel_step_edge() {
        // Columns 0..4 are 0, columns 4..8 are 255.
        let p = LumaPlane::from_fn(8, 8, |x, _| if x < 4 { 0.0 } else { 255.0 });
        let g = gradient_magnitude(&p, GradientOperator::Sobel).unwrap();
        for y in 0..8 {
            assert_eq!(g.get(3, y), 1020.0);
            assert_eq!(g.get(4, y), 1020.0);
            assert_eq!(g.get(1, y), 0.0);
            assert_eq!(g.get(6, y), 0.0);
        }
    }

    #[test]
    fn rotation_permutes_magnitudes() {
        let p = LumaPlane::from_fn(7, 5, |x, y| ((x * 31 + y * 17) % 23) as f64);
        // 90° rotation: (x, y) -> (h-1-y, x)
        let rot = LumaPlane::from_fn(5, 7, |x, y| p.get(y, 5 - 1 - x));
        let g = gradient_magnitude(&p, GradientOperator::Sobel).unwrap();
        let gr = gradient_magnitude(&rot, GradientOperator::Sobel).unwrap();
        for y in 0..7 {
            for x in 0..5 {
                assert!((gr.get(x, y) - g.get(y, 5 - 1 - x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn too_small() {
        assert!(
            gradient_magnitude(&LumaPlane::constant(2, 9, 0.0), GradientOperator::Sobel).is_err()
        );
    }
}
