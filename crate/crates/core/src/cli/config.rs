//! TOML run configuration.
//!
//! ```toml
//! [phi]
//! family = "power"          # or "tabulated"
//! p = 4.0
//! # grid_path = "phi.csv"   # tabulated: columns s, phi, dphi
//! # r = 0.0
//! # s0 = 1.0
//! # s1 = 10.0
//! # conjugate = false
//!
//! [domain]
//! bounds = [[0.0, 1.0], [0.0, 1.0]]
//! # counts = [16, 16]
//!
//! [field]
//! kind = "per_h"            # or "tensor"; ignored when `path` is set
//! re = [[[1.0, 0.0], [0.0, 16.0]], [[1.0, 0.0], [0.0, 1.0]]]
//! # im = ...                # same shape as `re`
//! # path = "field.csv"
//!
//! [options]
//! starts = 16
//! seed = 42
//! tol = 1e-7
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dissipativity::{CheckOptions, DEFAULT_TOL};
use crate::ellipticity::{ClassifyOptions, DEFAULT_Q_DIRECTIONS};
use crate::field::{io::load_field, CoefficientField, DomainBox, Interval};
use crate::linalg::{CMat, C64};
use crate::oracle::{FalsifyOptions, QuadOptions};
use crate::phi::{LambdaProfile, PhiSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub phi: PhiBlock,
    pub domain: DomainBlock,
    pub field: FieldBlock,
    #[serde(default)]
    pub options: OptionsBlock,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiBlock {
    pub family: String,
    pub p: Option<f64>,
    pub grid_path: Option<PathBuf>,
    pub r: Option<f64>,
    pub s0: Option<f64>,
    pub s1: Option<f64>,
    #[serde(default)]
    pub conjugate: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub bounds: Vec<[f64; 2]>,
    pub counts: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entries {
    PerH(Vec<Vec<Vec<f64>>>),
    Tensor(Vec<Vec<Vec<Vec<f64>>>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    pub path: Option<PathBuf>,
    pub kind: Option<String>,
    pub re: Option<Entries>,
    pub im: Option<Entries>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsBlock {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Quadrature intervals per piece; 0 picks a default by dimension.
    pub intervals: usize,
    pub budget: usize,
    pub q_directions: usize,
    /// Points of the Λ table.
    pub lambda_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// A previous `check` record whose witness `falsify` should use.
    pub witness_path: Option<PathBuf>,
    /// Where `falsify` writes the sampled counterexample.
    pub test_function_path: Option<PathBuf>,
    /// Samples per axis in the counterexample dump.
    pub dump_points: usize,
}

impl Default for OptionsBlock {
    fn default() -> Self {
        OptionsBlock {
            starts: 16,
            seed: 42,
            tol: DEFAULT_TOL,
            intervals: 0,
            budget: FalsifyOptions::default().budget,
            q_directions: DEFAULT_Q_DIRECTIONS,
            lambda_points: 50,
            t_min: 1e-6,
            t_max: 1e6,
            witness_path: None,
            test_function_path: None,
            dump_points: 33,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.options.seed = v;
        }
        if let Some(v) = o.starts {
            self.options.starts = v;
        }
        if let Some(v) = o.tol {
            self.options.tol = v;
        }
        if let Some(g) = o.grid {
            self.options.lambda_points = g;
            self.domain.counts = Some(vec![g; self.domain.bounds.len()]);
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn phi_spec(&self) -> Result<PhiSpec> {
        let b = &self.phi;
        let spec = match b.family.as_str() {
            "power" => PhiSpec::power(b.p.ok_or_else(|| config_err("[phi] power family needs p"))?)?,
            "tabulated" => {
                let path = b
                    .grid_path
                    .as_ref()
                    .ok_or_else(|| config_err("[phi] tabulated family needs grid_path"))?;
                let rows = read_phi_grid(&self.resolve(path))?;
                PhiSpec::tabulated(
                    rows,
                    b.r.ok_or_else(|| config_err("[phi] tabulated family needs r"))?,
                    b.s0.ok_or_else(|| config_err("[phi] tabulated family needs s0"))?,
                    b.s1,
                )?
            }
            other => return Err(config_err(format!("[phi] unknown family {other:?}"))),
        };
        if b.conjugate {
            spec.conjugate()
        } else {
            Ok(spec)
        }
    }

    pub fn profile(&self) -> Result<LambdaProfile> {
        self.phi_spec()?.lambda_profile()
    }

    pub fn domain(&self) -> Result<DomainBox> {
        let bounds: Vec<Interval> = self.domain.bounds.iter().map(|b| Interval::new(b[0], b[1])).collect();
        match &self.domain.counts {
            Some(c) => DomainBox::new(bounds, c.clone()),
            None => DomainBox::with_default_grid(bounds),
        }
    }

    pub fn field(&self) -> Result<CoefficientField> {
        let b = &self.field;
        if let Some(p) = &b.path {
            return load_field(&self.resolve(p));
        }
        let re = b.re.as_ref().ok_or_else(|| config_err("[field] needs either path or re"))?;
        let kind = b.kind.as_deref().unwrap_or(match re {
            Entries::PerH(_) => "per_h",
            Entries::Tensor(_) => "tensor",
        });
        match (kind, re, &b.im) {
            ("per_h", Entries::PerH(re), im) => {
                let im = match im {
                    None => None,
                    Some(Entries::PerH(v)) => Some(v),
                    Some(_) => return Err(config_err("[field] im has a different shape from re")),
                };
                let mats = re
                    .iter()
                    .enumerate()
                    .map(|(h, r)| matrix(r, im.and_then(|v| v.get(h))))
                    .collect::<Result<Vec<_>>>()?;
                CoefficientField::constant_per_h(mats)
            }
            ("tensor", Entries::Tensor(re), im) => {
                let im = match im {
                    None => None,
                    Some(Entries::Tensor(v)) => Some(v),
                    Some(_) => return Err(config_err("[field] im has a different shape from re")),
                };
                let tensor = re
                    .iter()
                    .enumerate()
                    .map(|(h, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(k, r)| matrix(r, im.and_then(|v| v.get(h)).and_then(|v| v.get(k))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                CoefficientField::constant_tensor(tensor)
            }
            (k, _, _) => Err(config_err(format!("[field] kind {k:?} does not match the shape of re"))),
        }
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            starts: self.options.starts,
            seed: self.options.seed,
            tol: self.options.tol,
        }
    }

    pub fn falsify_options(&self) -> FalsifyOptions {
        FalsifyOptions {
            budget: self.options.budget,
            quad: QuadOptions {
                intervals: self.options.intervals,
                ..QuadOptions::default()
            },
            ..FalsifyOptions::default()
        }
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            starts: self.options.starts,
            seed: self.options.seed,
            tol: self.options.tol,
            q_directions: self.options.q_directions,
            falsify: self.falsify_options(),
        }
    }
}

fn matrix(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>) -> Result<CMat> {
    let m = re.len();
    if re.iter().any(|row| row.len() != m) {
        return Err(config_err("[field] matrices must be square"));
    }
    if let Some(im) = im {
        if im.len() != m || im.iter().any(|row| row.len() != m) {
            return Err(config_err("[field] im has a different shape from re"));
        }
    }
    Ok(CMat::from_fn(m, m, |i, j| C64::new(re[i][j], im.map_or(0.0, |v| v[i][j]))))
}

#[derive(Deserialize)]
struct PhiRow {
    s: f64,
    phi: f64,
    dphi: f64,
}

/// Weight table with header `s,phi,dphi`.
pub fn read_phi_grid(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    rdr.deserialize::<PhiRow>()
        .map(|r| {
            r.map(|r| (r.s, r.phi, r.dphi)).map_err(|e| {
                let (line, column) = e.position().map_or((0, 0), |p| (p.line() as usize, 1));
                Error::Parse {
                    line,
                    column,
                    msg: e.to_string(),
                }
            })
        })
        .collect()
}
