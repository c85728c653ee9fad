use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Number, Value};

use crate::CliError;

/// A CSV cell. Floats are written with 17 significant digits.
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// Rewrites every float in a JSON tree with 17 significant digits.
fn widen(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            match fmt_f64(x).parse::<Number>() {
                Ok(m) => Value::Number(m),
                Err(_) => Value::Number(n),
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(widen).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, widen(v))).collect()),
        other => other,
    }
}

pub fn json_line<T: Serialize>(x: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(x).map_err(|e| CliError::Numeric(e.to_string()))?;
    serde_json::to_string(&widen(v)).map_err(|e| CliError::Numeric(e.to_string()))
}

pub struct Out {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Out {
    pub fn new(dir: PathBuf, svg: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Out { dir, svg })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        write_file(&p, body)?;
        Ok(p)
    }

    pub fn csv(&self, name: &str, header: &str, rows: &[Vec<Cell>]) -> Result<PathBuf, CliError> {
        let mut s = String::with_capacity(64 * (rows.len() + 1));
        s.push_str(header);
        s.push('\n');
        for r in rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    pub fn jsonl<T: Serialize>(&self, name: &str, items: &[T]) -> Result<PathBuf, CliError> {
        let mut s = String::new();
        for x in items {
            s.push_str(&json_line(x)?);
            s.push('\n');
        }
        self.write(name, &s)
    }

    pub fn svg(&self, name: &str, body: impl FnOnce() -> String) -> Result<Option<PathBuf>, CliError> {
        if !self.svg {
            return Ok(None);
        }
        self.write(name, &body()).map(Some)
    }
}

fn write_file(p: &Path, body: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    f.write_all(body.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}
