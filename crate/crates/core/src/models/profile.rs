use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `a0 + Σ_k cos[k-1] cos(2πkx) + sin[k-1] sin(2πkx)`.
    Trig { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Piecewise-linear interpolation of `(x, y)` with `x` from 0 to 1.
    Table { x: Vec<f64>, y: Vec<f64> },
}

/// Sampling function `f: [0,1] -> R`, evaluated at `x mod 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFunction {
    kind: ProfileKind,
    fmax: f64,
    fmin: f64,
}

impl ProfileFunction {
    pub fn trig(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::invalid("trig profile needs as many sine as cosine terms"));
        }
        if !a0.is_finite() || cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::invalid("trig coefficients must be finite"));
        }
        let mut f = ProfileFunction {
            kind: ProfileKind::Trig { a0, cos, sin },
            fmax: 0.0,
            fmin: 0.0,
        };
        f.fmax = f.search_extremum(1.0);
        f.fmin = -f.search_extremum(-1.0);
        Ok(f)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::trig(c, vec![], vec![])
    }

    pub fn table(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("table profile needs at least two breakpoints"));
        }
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if x[0] != 0.0 || *x.last().unwrap() != 1.0 {
            return Err(Error::invalid("table breakpoints must start at 0 and end at 1"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("table breakpoints must be strictly increasing"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table values must be finite"));
        }
        let fmax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let fmin = y.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(ProfileFunction {
            kind: ProfileKind::Table { x, y },
            fmax,
            fmin,
        })
    }

    /// `f(x) = x` on `[0, 1)`.
    pub fn identity() -> Self {
        Self::table(&[(0.0, 0.0), (1.0, 1.0)]).expect("valid table")
    }

    /// Two whitespace- or comma-separated columns: breakpoint, value.
    /// Blank lines and `#` comments are skipped.
    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("{}:{}: bad number `{s}`", path.display(), lineno + 1)))
            };
            if cols.len() != 2 {
                return Err(Error::invalid(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            points.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::table(&points)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn fmax(&self) -> f64 {
        self.fmax
    }

    pub fn fmin(&self) -> f64 {
        self.fmin
    }

    /// `max(|fmax|, |fmin|)`.
    pub fn sup_abs(&self) -> f64 {
        self.fmax.abs().max(self.fmin.abs())
    }

    /// Value at `x mod 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - x.floor();
        self.eval_closed(if t >= 1.0 { 0.0 } else { t })
    }

    /// Value on the closed interval, without wrapping `1` to `0`.
    fn eval_closed(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Trig { a0, cos, sin } => {
                let mut v = *a0;
                for (k, (c, s)) in cos.iter().zip(sin).enumerate() {
                    let arg = TAU * (k + 1) as f64 * t;
                    v += c * arg.cos() + s * arg.sin();
                }
                v
            }
            ProfileKind::Table { x, y } => {
                let i = x.partition_point(|&b| b <= t).clamp(1, x.len() - 1);
                let (x0, x1, y0, y1) = (x[i - 1], x[i], y[i - 1], y[i]);
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// `max sign*f` over `[0,1]`: grid scan, then golden-section refinement
    /// around the best node.
    fn search_extremum(&self, sign: f64) -> f64 {
        let g = |t: f64| sign * self.eval_closed(t.clamp(0.0, 1.0));
        let h = 1.0 / GRID as f64;
        let (best_i, _) = (0..=GRID)
            .map(|i| (i, g(i as f64 * h)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut lo = (best_i as f64 - 1.0) * h;
        let mut hi = (best_i as f64 + 1.0) * h;
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..80 {
            if gc > gd {
                hi = d;
                d = c;
                gd = gc;
                c = hi - phi * (hi - lo);
                gc = g(c);
            } else {
                lo = c;
                c = d;
                gc = gd;
                d = lo + phi * (hi - lo);
                gd = g(d);
            }
        }
        g(best_i as f64 * h).max(gc).max(gd)
    }

    /// Canonical descriptor: `trig:a0,a1,b1,...` or an inline table
    /// `pwl:x0:y0,x1:y1,...`.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            ProfileKind::Trig { a0, cos, sin } => {
                let mut parts = vec![fmt_num(*a0)];
                for (c, s) in cos.iter().zip(sin) {
                    parts.push(fmt_num(*c));
                    parts.push(fmt_num(*s));
                }
                format!("trig:{}", parts.join(","))
            }
            ProfileKind::Table { x, y } => {
                let parts: Vec<String> = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| format!("{}:{}", fmt_num(*a), fmt_num(*b)))
                    .collect();
                format!("pwl:{}", parts.join(","))
            }
        }
    }

    /// Parses `trig:a0[,a1,b1,...]`, `table:path`, `pwl:x:y,...`, or
    /// `identity`.
    pub fn parse(desc: &str) -> Result<Self> {
        let (tag, rest) = desc.split_once(':').unwrap_or((desc, ""));
        match tag {
            "identity" if rest.is_empty() => Ok(Self::identity()),
            "trig" => {
                let nums = parse_list(desc, rest)?;
                let Some((&a0, tail)) = nums.split_first() else {
                    return Err(Error::descriptor(desc, "trig profile needs a0"));
                };
                let mut cos = Vec::new();
                let mut sin = Vec::new();
                for pair in tail.chunks(2) {
                    cos.push(pair[0]);
                    sin.push(pair.get(1).copied().unwrap_or(0.0));
                }
                Self::trig(a0, cos, sin).map_err(|e| Error::descriptor(desc, e.to_string()))
            }
            "table" => {
                if rest.is_empty() {
                    return Err(Error::descriptor(desc, "table profile needs a path"));
                }
                Self::read_table(Path::new(rest))
            }
            "pwl" => {
                let mut points = Vec::new();
                for item in rest.split(',') {
                    let (x, y) = item
                        .split_once(':')
                        .ok_or_else(|| Error::descriptor(desc, "expected x:y pairs"))?;
                    let num = |s: &str| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::descriptor(desc, format!("bad number `{s}`")))
                    };
                    points.push((num(x)?, num(y)?));
                }
                Self::table(&points).map_err(|e| Error::descriptor(desc, e.to_string()))
            }
            _ => Err(Error::descriptor(
                desc,
                "unknown profile kind (trig, table, pwl, identity)",
            )),
        }
    }
}

pub(crate) fn fmt_num(x: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{x:?}")
}

pub(crate) fn parse_list(desc: &str, rest: &str) -> Result<Vec<f64>> {
    if rest.trim().is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|s| {
            let v = s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::descriptor(desc, format!("bad number `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::descriptor(desc, "numbers must be finite"))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_table() {
        let f = ProfileFunction::identity();
        assert_eq!(f.eval(0.25), 0.25);
        assert_eq!(f.eval(1.25), 0.25);
        assert_eq!(f.eval(-0.25), 0.75);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!((f.fmin(), f.fmax()), (0.0, 1.0));
    }

    #[test]
    fn trig_extrema() {
        let f = ProfileFunction::parse("trig:0,1").unwrap();
        assert!((f.fmax() - 1.0).abs() < 1e-9);
        assert!((f.fmin() + 1.0).abs() < 1e-9);
        assert!((f.eval(0.5) + 1.0).abs() < 1e-15);

        // 0.3 + 0.5 cos + 0.2 sin(4πx): extrema off the grid
        let f = ProfileFunction::trig(0.3, vec![0.5, 0.0], vec![0.0, 0.2]).unwrap();
        let dense_max = (0..2_000_000)
            .map(|i| f.eval(i as f64 / 2e6))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(f.fmax() >= dense_max - 1e-12);
        assert!(f.fmax() - dense_max < 1e-9);
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["trig:0.5,1,-0.25,0.125,0", "pwl:0:0,0.5:2,1:1"] {
            let f = ProfileFunction::parse(d).unwrap();
            let g = ProfileFunction::parse(&f.descriptor()).unwrap();
            assert_eq!(f, g);
        }
        assert!(ProfileFunction::parse("trig:").is_err());
        assert!(ProfileFunction::parse("pwl:0:0,0.5:1").is_err());
        assert!(ProfileFunction::parse("spline:1").is_err());
    }

    #[test]
    fn table_file() {
        let dir = std::env::temp_dir().join(format!("profile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.txt");
        std::fs::write(&path, "# x f\n0 1\n0.5 -1\n1 1\n").unwrap();
        let f = ProfileFunction::parse(&format!("table:{}", path.display())).unwrap();
        assert_eq!(f.eval(0.25), 0.0);
        assert_eq!((f.fmin(), f.fmax()), (-1.0, 1.0));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
