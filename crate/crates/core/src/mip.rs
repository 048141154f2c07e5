//! A small in-memory MIP representation with an MPS writer.
//!
//! Models are always maximization problems. MPS has no portable way to state
//! the sense, so the writer negates the objective and emits a minimization;
//! the optimum of the file is the negated optimum of the model.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Var {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub obj: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct MipModel {
    pub name: String,
    pub vars: Vec<Var>,
    pub rows: Vec<Row>,
    index: HashMap<String, usize>,
}

impl MipModel {
    pub fn new(name: &str) -> Self {
        MipModel { name: name.to_string(), ..Default::default() }
    }

    fn push_var(&mut self, var: Var) -> usize {
        let k = self.vars.len();
        let prev = self.index.insert(var.name.clone(), k);
        assert!(prev.is_none(), "duplicate variable name {}", var.name);
        self.vars.push(var);
        k
    }

    pub fn add_binary(&mut self, name: &str, obj: f64) -> usize {
        self.push_var(Var { name: name.to_string(), lower: 0.0, upper: 1.0, integer: true, obj })
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64, obj: f64) -> usize {
        self.push_var(Var { name: name.to_string(), lower, upper, integer: false, obj })
    }

    /// Adds a row, merging repeated variables and dropping zero coefficients.
    pub fn add_row(&mut self, name: &str, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (v, a) in coeffs {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(entry) => entry.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row { name: name.to_string(), coeffs: merged, sense, rhs });
        self.rows.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn n_integer(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn n_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, &xi)| v.obj * xi).sum()
    }

    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.coeffs.iter().map(|&(v, a)| a * x[v]).sum()
    }

    /// Checks bounds, integrality and rows within absolute tolerance `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        let bounds_ok = self.vars.iter().zip(x).all(|(v, &xi)| {
            xi >= v.lower - tol && xi <= v.upper + tol && (!v.integer || (xi - xi.round()).abs() <= tol)
        });
        bounds_ok
            && self.rows.iter().all(|r| {
                let lhs = self.row_activity(r, x);
                match r.sense {
                    RowSense::Le => lhs <= r.rhs + tol,
                    RowSense::Ge => lhs >= r.rhs - tol,
                    RowSense::Eq => (lhs - r.rhs).abs() <= tol,
                }
            })
    }

    /// MPS text. Fields are whitespace separated in the fixed-format column
    /// order; names longer than eight characters require a reader that
    /// splits on whitespace (free MPS), which all common solvers accept.
    pub fn to_mps(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME          {}", self.name);
        out.push_str("ROWS\n N  obj\n");
        for r in &self.rows {
            let tag = match r.sense {
                RowSense::Le => "L",
                RowSense::Ge => "G",
                RowSense::Eq => "E",
            };
            let _ = writeln!(out, " {tag}  {}", r.name);
        }

        let mut by_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vars.len()];
        for (ri, r) in self.rows.iter().enumerate() {
            for &(v, a) in &r.coeffs {
                by_var[v].push((ri, a));
            }
        }

        out.push_str("COLUMNS\n");
        let mut in_int = false;
        let mut marker = 0;
        for (k, v) in self.vars.iter().enumerate() {
            if v.integer != in_int {
                let kind = if v.integer { "'INTORG'" } else { "'INTEND'" };
                let _ = writeln!(out, "    MARKER{marker:<6} 'MARKER'                 {kind}");
                marker += 1;
                in_int = v.integer;
            }
            if v.obj != 0.0 {
                let _ = writeln!(out, "    {:<8}  {:<8}  {}", v.name, "obj", num(-v.obj));
            }
            for &(ri, a) in &by_var[k] {
                let _ = writeln!(out, "    {:<8}  {:<8}  {}", v.name, self.rows[ri].name, num(a));
            }
            if v.obj == 0.0 && by_var[k].is_empty() {
                // Keep otherwise empty columns visible to the reader.
                let _ = writeln!(out, "    {:<8}  {:<8}  0", v.name, "obj");
            }
        }
        if in_int {
            let _ = writeln!(out, "    MARKER{marker:<6} 'MARKER'                 'INTEND'");
        }

        out.push_str("RHS\n");
        for r in &self.rows {
            if r.rhs != 0.0 {
                let _ = writeln!(out, "    {:<8}  {:<8}  {}", "rhs", r.name, num(r.rhs));
            }
        }

        out.push_str("BOUNDS\n");
        for v in &self.vars {
            let lo_inf = v.lower == f64::NEG_INFINITY;
            let up_inf = v.upper == f64::INFINITY;
            if lo_inf && up_inf {
                let _ = writeln!(out, " FR {:<8}  {}", "bnd", v.name);
                continue;
            }
            if lo_inf {
                let _ = writeln!(out, " MI {:<8}  {}", "bnd", v.name);
            } else if v.lower != 0.0 {
                let _ = writeln!(out, " LO {:<8}  {:<8}  {}", "bnd", v.name, num(v.lower));
            }
            if !up_inf {
                let _ = writeln!(out, " UP {:<8}  {:<8}  {}", "bnd", v.name, num(v.upper));
            }
        }
        out.push_str("ENDATA\n");
        out
    }

    pub fn write_mps(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_mps())?;
        Ok(())
    }
}

/// Shortest round-trip decimal representation.
fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}
