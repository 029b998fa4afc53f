//! Initial conditions: analytic presets evaluated at the nodes, or nodal
//! values read from a CSV file.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, NodalField};
use crate::io::read_nodal_csv;
use crate::stepper::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant {
        c_f: f64,
        c_g: f64,
    },
    /// `height * cos²(pi (x - center) / (2 width))` on `|x - center| < width`, zero outside.
    Bump {
        center: f64,
        width: f64,
        height_f: f64,
        height_g: f64,
    },
    Step {
        jump_at: f64,
        left_f: f64,
        right_f: f64,
        left_g: f64,
        right_g: f64,
    },
    /// `f` is a bump at `center_f`, `g` a bump at `center_g`, both of the same width.
    TwoBumps {
        center_f: f64,
        center_g: f64,
        width: f64,
        height_f: f64,
        height_g: f64,
    },
    #[serde(skip)]
    File {
        path: PathBuf,
    },
}

fn cos2_bump(x: f64, center: f64, width: f64, height: f64) -> f64 {
    let z = (x - center) / width;
    if z.abs() < 1.0 {
        height * (FRAC_PI_2 * z).cos().powi(2)
    } else {
        0.0
    }
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let height = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    format!("ic.{key}"),
                    format!("height must be non-negative, got {v}"),
                ))
            }
        };
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("ic.{key}"), "must be finite"))
            }
        };
        match self {
            InitialCondition::Constant { c_f, c_g } => {
                height("c_f", *c_f)?;
                height("c_g", *c_g)
            }
            InitialCondition::Bump {
                center,
                width,
                height_f,
                height_g,
            } => {
                finite("center", *center)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::config("ic.width", "must be positive"));
                }
                height("height_f", *height_f)?;
                height("height_g", *height_g)
            }
            InitialCondition::Step {
                jump_at,
                left_f,
                right_f,
                left_g,
                right_g,
            } => {
                finite("jump_at", *jump_at)?;
                height("left_f", *left_f)?;
                height("right_f", *right_f)?;
                height("left_g", *left_g)?;
                height("right_g", *right_g)
            }
            InitialCondition::TwoBumps {
                center_f,
                center_g,
                width,
                height_f,
                height_g,
            } => {
                finite("center_f", *center_f)?;
                finite("center_g", *center_g)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::config("ic.width", "must be positive"));
                }
                height("height_f", *height_f)?;
                height("height_g", *height_g)
            }
            InitialCondition::File { .. } => Ok(()),
        }
    }
}

pub fn build_initial_condition(spec: &InitialCondition, g: &Grid) -> Result<State> {
    spec.validate()?;
    let state = match spec {
        InitialCondition::Constant { c_f, c_g } => State::constant(g.len(), *c_f, *c_g),
        InitialCondition::Bump {
            center,
            width,
            height_f,
            height_g,
        } => State {
            f: NodalField::from_fn(g, |x| cos2_bump(x, *center, *width, *height_f)),
            g: NodalField::from_fn(g, |x| cos2_bump(x, *center, *width, *height_g)),
        },
        InitialCondition::Step {
            jump_at,
            left_f,
            right_f,
            left_g,
            right_g,
        } => State {
            f: NodalField::from_fn(g, |x| if x < *jump_at { *left_f } else { *right_f }),
            g: NodalField::from_fn(g, |x| if x < *jump_at { *left_g } else { *right_g }),
        },
        InitialCondition::TwoBumps {
            center_f,
            center_g,
            width,
            height_f,
            height_g,
        } => State {
            f: NodalField::from_fn(g, |x| cos2_bump(x, *center_f, *width, *height_f)),
            g: NodalField::from_fn(g, |x| cos2_bump(x, *center_g, *width, *height_g)),
        },
        InitialCondition::File { path } => {
            let s = read_nodal_csv(path)?;
            if s.len() != g.len() {
                return Err(Error::config(
                    "ic.file",
                    format!(
                        "{} has {} rows but the grid has {} nodes",
                        path.display(),
                        s.len(),
                        g.len()
                    ),
                ));
            }
            if let Some(v) =
                s.f.iter()
                    .chain(s.g.iter())
                    .find(|v| !(**v >= 0.0 && v.is_finite()))
            {
                return Err(Error::Data(format!(
                    "{}: initial heights must be non-negative and finite, found {v}",
                    path.display()
                )));
            }
            s
        }
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn constant_preset() {
        let g = build_grid(0.0, 1.0, 7).unwrap();
        let s = build_initial_condition(&InitialCondition::Constant { c_f: 1.0, c_g: 2.0 }, &g)
            .unwrap();
        assert!(s.f.iter().all(|v| *v == 1.0));
        assert!(s.g.iter().all(|v| *v == 2.0));
    }

    #[test]
    fn bump_preset_shape() {
        let g = build_grid(0.0, 1.0, 21).unwrap();
        let spec = InitialCondition::Bump {
            center: 0.5,
            width: 0.5,
            height_f: 1.0,
            height_g: 0.3,
        };
        let s = build_initial_condition(&spec, &g).unwrap();
        let argmax =
            s.f.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
        assert_eq!(argmax, 10);
        assert_eq!(s.f[10], 1.0);
        assert!(s.f[0].abs() < 1e-30 && s.f[20].abs() < 1e-30);
        assert!((s.g[10] - 0.3).abs() < 1e-16);
    }

    #[test]
    fn negative_heights_rejected() {
        let g = build_grid(0.0, 1.0, 5).unwrap();
        let spec = InitialCondition::Step {
            jump_at: 0.5,
            left_f: 1.0,
            right_f: -1.0,
            left_g: 0.0,
            right_g: 0.0,
        };
        match build_initial_condition(&spec, &g) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "ic.right_f"),
            other => panic!("{other:?}"),
        }
    }
}
