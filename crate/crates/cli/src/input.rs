//! Plain-text inputs: field files and parameter-point files.
//!
//! Field file:
//! ```text
//! # comment
//! degree 2
//! a 2 0 1/2      # coefficient of x^2 in P
//! b 1 1 -3       # coefficient of x y in Q
//! ```
//! Point file: one `name value` pair per line, e.g. `a20 1/3`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use focal_core::bautin::FieldSpec;
use focal_core::melnikov::{VectorField, XyPoly};
use focal_core::polycore::{ParamPoly, Rational, Vars};

#[derive(Debug)]
pub struct InputError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file, l, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for InputError {}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError {
        file: path.display().to_string(),
        line: None,
        message: e.to_string(),
    })
}

fn parse_rational(s: &str) -> Option<Rational> {
    let q: Rational = s.parse().ok()?;
    Some(q)
}

/// `(line number, fields)` for every non-blank line, comments stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, l)| {
        let body = l.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((n + 1, fields))
    })
}

/// Parsed field file: optional degree and the listed coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub path: String,
    pub degree: Option<u32>,
    /// `(which, i, j) → value`, `which` is `'a'` (for P) or `'b'` (for Q).
    pub coeffs: BTreeMap<(char, u32, u32), Rational>,
}

impl FieldFile {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = read(path)?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, InputError> {
        let err = |line: usize, message: String| InputError { file: name.to_string(), line: Some(line), message };
        let mut degree = None;
        let mut coeffs = BTreeMap::new();
        for (n, f) in lines(text) {
            match f.as_slice() {
                ["degree", d] => {
                    if degree.is_some() {
                        return Err(err(n, "duplicate degree line".into()));
                    }
                    let d: u32 = d.parse().map_err(|_| err(n, format!("invalid degree '{d}'")))?;
                    degree = Some(d);
                }
                [w @ ("a" | "b"), i, j, v] => {
                    let i: u32 = i.parse().map_err(|_| err(n, format!("invalid exponent '{i}'")))?;
                    let j: u32 = j.parse().map_err(|_| err(n, format!("invalid exponent '{j}'")))?;
                    let v = parse_rational(v).ok_or_else(|| err(n, format!("invalid rational '{v}'")))?;
                    let key = (w.chars().next().unwrap(), i, j);
                    if coeffs.insert(key, v).is_some() {
                        return Err(err(n, format!("duplicate coefficient {w} {i} {j}")));
                    }
                }
                _ => return Err(err(n, format!("unrecognized line '{}'", f.join(" ")))),
            }
        }
        Ok(FieldFile { path: name.to_string(), degree, coeffs })
    }

    fn file_error(&self, message: String) -> InputError {
        InputError { file: self.path.clone(), line: None, message }
    }

    fn homogeneous_degree(&self) -> Result<u32, InputError> {
        let d = self.degree.ok_or_else(|| self.file_error("missing 'degree' line".into()))?;
        if d < 2 {
            return Err(self.file_error(format!("degree {d} is below 2")));
        }
        if let Some(((w, i, j), _)) = self.coeffs.iter().find(|((_, i, j), _)| i + j != d) {
            return Err(self.file_error(format!("term {w} {i} {j} is not of degree {d}")));
        }
        Ok(d)
    }

    /// Homogeneous field with unlisted coefficients set to zero.
    pub fn numeric_spec(&self) -> Result<FieldSpec, InputError> {
        let d = self.homogeneous_degree()?;
        let get = |w: char, j: u32| self.coeffs.get(&(w, d - j, j)).cloned().unwrap_or_default();
        let a = (0..=d).map(|j| get('a', j)).collect();
        let b = (0..=d).map(|j| get('b', j)).collect();
        FieldSpec::numeric(d, a, b).map_err(|e| self.file_error(e.to_string()))
    }

    /// Homogeneous family: listed coefficients are fixed, every unlisted one
    /// becomes a free parameter named like `a20` or `b11`.
    pub fn family_spec(&self) -> Result<FieldSpec, InputError> {
        let d = self.homogeneous_degree()?;
        let full = FieldSpec::symbolic(d).map_err(|e| self.file_error(e.to_string()))?;
        let names = full.vars().names().to_vec();
        let key = |idx: usize| {
            let n = d as usize + 1;
            let (w, j) = if idx < n { ('a', idx as u32) } else { ('b', (idx - n) as u32) };
            (w, d - j, j)
        };
        let free: Vec<String> =
            (0..names.len()).filter(|&i| !self.coeffs.contains_key(&key(i))).map(|i| names[i].clone()).collect();
        let vars = Vars::new(&free);
        let mut slots = Vec::with_capacity(names.len());
        let mut next = 0;
        for i in 0..names.len() {
            match self.coeffs.get(&key(i)) {
                Some(v) => slots.push(ParamPoly::constant(&vars, v.clone())),
                None => {
                    slots.push(ParamPoly::var(&vars, next));
                    next += 1;
                }
            }
        }
        let b = slots.split_off(d as usize + 1);
        FieldSpec::from_polys(d, vars, slots, b).map_err(|e| self.file_error(e.to_string()))
    }

    /// Vector field with arbitrary support.
    pub fn vector_field(&self) -> VectorField {
        let vars = Vars::empty();
        let mut p = XyPoly::zero(&vars);
        let mut q = XyPoly::zero(&vars);
        for ((w, i, j), v) in &self.coeffs {
            let c = ParamPoly::constant(&vars, v.clone());
            if *w == 'a' {
                p.add_term(*i, *j, &c);
            } else {
                q.add_term(*i, *j, &c);
            }
        }
        VectorField { p, q }
    }
}

/// Values for named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFile {
    pub path: String,
    pub values: BTreeMap<String, (usize, Rational)>,
}

impl PointFile {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = read(path)?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, InputError> {
        let err = |line: usize, message: String| InputError { file: name.to_string(), line: Some(line), message };
        let mut values = BTreeMap::new();
        for (n, f) in lines(text) {
            let [key, v] = f.as_slice() else {
                return Err(err(n, format!("expected 'name value', found '{}'", f.join(" "))));
            };
            let v = parse_rational(v).ok_or_else(|| err(n, format!("invalid rational '{v}'")))?;
            if values.insert(key.to_string(), (n, v)).is_some() {
                return Err(err(n, format!("duplicate parameter '{key}'")));
            }
        }
        Ok(PointFile { path: name.to_string(), values })
    }

    /// Point in the order of `vars`; missing parameters are zero.
    pub fn point_for(&self, vars: &Vars) -> Result<Vec<Rational>, InputError> {
        for (name, (line, _)) in &self.values {
            if vars.index_of(name).is_none() {
                return Err(InputError {
                    file: self.path.clone(),
                    line: Some(*line),
                    message: format!("'{name}' is not a free parameter of the field (free: {})", vars.names().join(", ")),
                });
            }
        }
        Ok(vars.names().iter().map(|n| self.values.get(n).map(|(_, v)| v.clone()).unwrap_or_default()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_field_file() {
        let f = FieldFile::parse("t", "# quadratic\ndegree 2\na 2 0 1/2\nb 0 2 -3 # tail\n\n").unwrap();
        assert_eq!(f.degree, Some(2));
        assert_eq!(f.coeffs.len(), 2);
        let spec = f.numeric_spec().unwrap();
        assert_eq!(spec.a(2, 0).constant_value().unwrap(), Rational::new(1.into(), 2.into()));
        let fam = f.family_spec().unwrap();
        assert_eq!(fam.vars().names(), &["a11", "a02", "b20", "b11"]);
    }

    #[test]
    fn rejects_bad_lines() {
        let e = FieldFile::parse("t", "degree 2\na 2 0 1\na 2 0 2\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = FieldFile::parse("t", "degree 2\nc 1 1 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = FieldFile::parse("t", "degree 2\na 1 1 x\n").unwrap_err();
        assert!(e.message.contains("rational"));
        let f = FieldFile::parse("t", "degree 2\na 1 0 1\n").unwrap();
        assert!(f.numeric_spec().is_err());
    }

    #[test]
    fn point_file() {
        let p = PointFile::parse("p", "a20 1/3\nb02 -1\n").unwrap();
        let vars = Vars::new(&["a20", "a11", "b02"]);
        let pt = p.point_for(&vars).unwrap();
        assert_eq!(pt[1], Rational::default());
        assert!(p.point_for(&Vars::new(&["a20"])).is_err());
        assert_eq!(PointFile::parse("p", "a20\n").unwrap_err().line, Some(1));
    }
}
