use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::circle2::DEFAULT_N_MAX;
use crate::deform::{DeformationParams, Model};
use crate::diagnostics::Form;
use crate::error::{Error, Result};
use crate::frw4::{GridSpec, Lattice, TimeGrid};
use crate::geometry::{MetricSpec, VectorFieldSpec};
use crate::series::DEFAULT_ORDER;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "TWISTQFT_OUT";

/// Flat run configuration, read from `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub xi: f64,
    pub lambda: f64,
    pub order: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    /// Lattice points and box length per spatial axis.
    pub n: usize,
    pub box_len: f64,
    /// Overrides for the twist axis; zero keeps `n` / `box`.
    pub n1: usize,
    pub box1: f64,
    pub n_max: usize,
    pub trials: usize,
    pub k1_max: f64,
    pub k1_points: usize,
    pub metric: String,
    pub field: String,
    pub form: Form,
    pub rotation: String,
    pub shift: [f64; 3],
    pub src_center: f64,
    pub src_width: f64,
    pub src_t0: f64,
    pub src_t1: f64,
    pub src_sep: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Frw4,
            xi: 0.25,
            lambda: 0.1,
            order: DEFAULT_ORDER,
            seed: 1,
            out: PathBuf::from("twistqft-out"),
            threads: 0,
            t_min: 1.0,
            t_max: 3.0,
            nt: 64,
            n: 32,
            box_len: 3.0,
            n1: 0,
            box1: 0.0,
            n_max: DEFAULT_N_MAX,
            trials: 8,
            k1_max: 10.0,
            k1_points: 41,
            metric: "frw_linear".into(),
            field: "time_dilation".into(),
            form: Form::OmegaStar,
            rotation: "x1x2".into(),
            shift: [0.0; 3],
            src_center: 0.0,
            src_width: 0.5,
            src_t0: 1.2,
            src_t1: 2.0,
            src_sep: 1.5,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse(key, v)).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "model" => {
                self.model = match value {
                    "frw4" => Model::Frw4,
                    "circle2" => Model::Circle2,
                    _ => return Err(Error::InvalidInput(format!("model: unknown {value:?}"))),
                }
            }
            "xi" => self.xi = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "order" => self.order = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = parse(key, value)?,
            "t_min" => self.t_min = parse(key, value)?,
            "t_max" => self.t_max = parse(key, value)?,
            "nt" => self.nt = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "box" => self.box_len = parse(key, value)?,
            "n1" => self.n1 = parse(key, value)?,
            "box1" => self.box1 = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "k1_max" => self.k1_max = parse(key, value)?,
            "k1_points" => self.k1_points = parse(key, value)?,
            "metric" => self.metric = value.into(),
            "field" => self.field = value.into(),
            "form" => {
                self.form = match value {
                    "omega" => Form::Omega,
                    "omega_star" => Form::OmegaStar,
                    _ => return Err(Error::InvalidInput(format!("form: unknown {value:?}"))),
                }
            }
            "rotation" => self.rotation = value.into(),
            "shift" => {
                let v = parse_list(key, value)?;
                self.shift = v
                    .try_into()
                    .map_err(|_| Error::InvalidInput("shift needs three components".into()))?;
            }
            "src_center" => self.src_center = parse(key, value)?,
            "src_width" => self.src_width = parse(key, value)?,
            "src_t0" => self.src_t0 = parse(key, value)?,
            "src_t1" => self.src_t1 = parse(key, value)?,
            "src_sep" => self.src_sep = parse(key, value)?,
            other => return Err(Error::InvalidInput(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Every key that affects numerical results, sorted. Output location and
    /// thread count are excluded.
    pub fn canonical(&self) -> String {
        let model = match self.model {
            Model::Frw4 => "frw4",
            Model::Circle2 => "circle2",
        };
        let form = match self.form {
            Form::Omega => "omega",
            Form::OmegaStar => "omega_star",
        };
        let mut pairs = vec![
            ("box", format!("{}", self.box_len)),
            ("box1", format!("{}", self.box1)),
            ("field", self.field.clone()),
            ("form", form.into()),
            ("k1_max", format!("{}", self.k1_max)),
            ("k1_points", format!("{}", self.k1_points)),
            ("lambda", format!("{}", self.lambda)),
            ("metric", self.metric.clone()),
            ("model", model.into()),
            ("n", format!("{}", self.n)),
            ("n1", format!("{}", self.n1)),
            ("n_max", format!("{}", self.n_max)),
            ("nt", format!("{}", self.nt)),
            ("order", format!("{}", self.order)),
            ("rotation", self.rotation.clone()),
            ("seed", format!("{}", self.seed)),
            ("shift", fmt_list(&self.shift)),
            ("src_center", format!("{}", self.src_center)),
            ("src_sep", format!("{}", self.src_sep)),
            ("src_t0", format!("{}", self.src_t0)),
            ("src_t1", format!("{}", self.src_t1)),
            ("src_width", format!("{}", self.src_width)),
            ("t_max", format!("{}", self.t_max)),
            ("t_min", format!("{}", self.t_min)),
            ("trials", format!("{}", self.trials)),
            ("xi", format!("{}", self.xi)),
        ];
        pairs.sort();
        let mut s = String::new();
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Checks the fields every command relies on.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("xi", self.xi),
            ("lambda", self.lambda),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("box", self.box_len),
            ("box1", self.box1),
            ("k1_max", self.k1_max),
            ("src_center", self.src_center),
            ("src_width", self.src_width),
            ("src_t0", self.src_t0),
            ("src_t1", self.src_t1),
            ("src_sep", self.src_sep),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{k} must be finite")));
            }
        }
        DeformationParams::new(self.lambda, self.xi, self.model)?;
        self.time_grid()?;
        if self.n == 0 || self.box_len <= 0.0 || self.box1 < 0.0 {
            return Err(Error::InvalidInput("lattice sizes and box lengths must be positive".into()));
        }
        if self.n_max == 0 || self.trials == 0 || self.k1_points == 0 {
            return Err(Error::InvalidInput("n_max, trials and k1_points must be positive".into()));
        }
        if !(self.src_width > 0.0 && self.src_t0 > 0.0 && self.src_t1 > self.src_t0) {
            return Err(Error::InvalidInput("source needs positive width and 0 < src_t0 < src_t1".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<DeformationParams> {
        DeformationParams::new(self.lambda, self.xi, self.model)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_min, self.t_max, self.nt)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let n1 = if self.n1 == 0 { self.n } else { self.n1 };
        let l1 = if self.box1 == 0.0 { self.box_len } else { self.box1 };
        Ok(GridSpec::new(
            self.time_grid()?,
            Lattice::new([n1, self.n, self.n], [l1, self.box_len, self.box_len])?,
        ))
    }

    pub fn metric_spec(&self) -> Result<MetricSpec> {
        parse_metric(&self.metric)
    }

    pub fn field_spec(&self, dim: usize) -> Result<VectorFieldSpec> {
        parse_field(&self.field, dim)
    }

    /// Rotation matrix named by `rotation`.
    pub fn rotation_matrix(&self) -> Result<[[f64; 3]; 3]> {
        match self.rotation.as_str() {
            "none" => Ok([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            "x1" => Ok([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
            "x1x2" => Ok([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
            other => Err(Error::InvalidInput(format!("rotation: expected none, x1 or x1x2, got {other:?}"))),
        }
    }
}

/// `minkowski:D`, `frw_power:D:p`, `frw_linear` or `circle2`.
pub fn parse_metric(s: &str) -> Result<MetricSpec> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let m = match parts.as_slice() {
        ["minkowski", d] => MetricSpec::Minkowski { dim: parse("metric", d)? },
        ["frw_power", d, p] => MetricSpec::FrwPower { dim: parse("metric", d)?, p: parse("metric", p)? },
        ["frw_linear"] => MetricSpec::FrwLinear,
        ["circle2"] => MetricSpec::Circle2,
        _ => return Err(Error::InvalidInput(format!("metric: unknown {s:?}"))),
    };
    m.validate()?;
    Ok(m)
}

/// `translation:i`, `rotation:a,b,c`, `dilation`, `frw_homothety:p`,
/// `time_dilation`, `circle_rotation:c`, optionally prefixed by `scale*`.
pub fn parse_field(s: &str, dim: usize) -> Result<VectorFieldSpec> {
    if let Some((f, rest)) = s.split_once('*') {
        return Ok(parse_field(rest, dim)?.scaled(parse("field", f)?));
    }
    let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    let need = || arg.ok_or_else(|| Error::InvalidInput(format!("field: {name} needs an argument")));
    Ok(match name.trim() {
        "translation" => {
            let axis: usize = parse("field", need()?)?;
            if axis >= dim {
                return Err(Error::InvalidInput(format!("field: axis {axis} out of range for dimension {dim}")));
            }
            VectorFieldSpec::translation_axis(dim, axis)
        }
        "rotation" => {
            let v = parse_list("field", need()?)?;
            VectorFieldSpec::Rotation {
                axis: v.try_into().map_err(|_| Error::InvalidInput("rotation axis needs three components".into()))?,
            }
        }
        "dilation" => VectorFieldSpec::Dilation,
        "frw_homothety" => VectorFieldSpec::FrwHomothety { p: parse("field", need()?)? },
        "time_dilation" => VectorFieldSpec::TimeDilation,
        "circle_rotation" => VectorFieldSpec::CircleRotation { coefficient: parse("field", need()?)? },
        other => return Err(Error::InvalidInput(format!("field: unknown {other:?}"))),
    })
}
