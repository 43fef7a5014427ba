use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::Diffusion;
use crate::geometry2d::{SpdTensor, Vec2};

/// Built-in spatially varying tensors, by name, with a one-line summary.
pub const DEMO_FIELDS: &[(&str, &str)] = &[
    ("identity", "D = I everywhere"),
    ("benchmark", "the constant benchmark tensor"),
    ("rotating", "eigenvalues 1000 and 1, major axis tangent to circles about (8, 8)"),
    ("layered", "benchmark tensor for y < 8, its mirror image (d12 < 0) above"),
    ("graded", "diag(1 + x^2, 1) with x in domain units"),
];

/// Eigenvalue `major` along angle `theta`, `minor` across it.
fn aligned(major: f64, minor: f64, theta: f64) -> Result<SpdTensor> {
    let (s, c) = theta.sin_cos();
    SpdTensor::new(
        major * c * c + minor * s * s,
        (major - minor) * c * s,
        major * s * s + minor * c * c,
    )
}

pub fn demo_field(name: &str) -> Result<Diffusion> {
    let f: Arc<dyn Fn(Vec2) -> Result<SpdTensor> + Send + Sync> = match name {
        "identity" => return Ok(Diffusion::Constant(SpdTensor::IDENTITY)),
        "benchmark" => return Ok(Diffusion::Constant(super::benchmark_spec().diffusion)),
        "rotating" => Arc::new(|p: Vec2| {
            let theta = (p.y - 8.0).atan2(p.x - 8.0) + FRAC_PI_2;
            aligned(1000.0, 1.0, theta)
        }),
        "layered" => Arc::new(|p: Vec2| {
            if p.y < 8.0 {
                SpdTensor::new(500.5, 499.5, 500.5)
            } else {
                SpdTensor::new(500.5, -499.5, 500.5)
            }
        }),
        "graded" => Arc::new(|p: Vec2| SpdTensor::diag(1.0 + p.x * p.x, 1.0)),
        other => {
            let known: Vec<&str> = DEMO_FIELDS.iter().map(|f| f.0).collect();
            return Err(Error::InvalidParameter(format!(
                "unknown field '{other}' (known: {})",
                known.join(", ")
            )));
        }
    };
    Ok(Diffusion::Field(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_field_resolves_and_is_spd_on_the_domain() {
        for (name, _) in DEMO_FIELDS {
            let d = demo_field(name).unwrap();
            for i in 0..=8 {
                for j in 0..=8 {
                    let p = Vec2::new(2.0 * i as f64, 2.0 * j as f64);
                    assert!(d.at(p).is_ok(), "{name} at {p:?}");
                }
            }
        }
    }

    #[test]
    fn rotating_field_is_tangential() {
        let Diffusion::Field(f) = demo_field("rotating").unwrap() else {
            panic!("expected a field")
        };
        let d = f(Vec2::new(12.0, 8.0)).unwrap();
        // tangent at (12, 8) is the y axis
        assert!((d.d22() - 1000.0).abs() < 1e-9 && (d.d11() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_name_lists_choices() {
        let e = demo_field("nope").unwrap_err();
        assert!(e.to_string().contains("rotating"));
    }
}
