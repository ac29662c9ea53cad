//! The surface file format.
//!
//! One surface per line, `p k : c1,...,c20`, coefficients in the monomial order of
//! [`crate::surface::MONOMIALS`]. Blank lines and text after `#` are ignored. A coefficient is
//!
//! * an integer, reduced into the prime field (`-1`, `3`);
//! * `{a0,a1,...}`, the element `a0 + a1 g + ...` of `F_{p^k}` in the basis of powers of the
//!   generator `g` (a root of the least monic irreducible of degree `k`);
//! * `[c0,c1,...]`, the polynomial `c0 + c1 u + ...` in `F_{p^k}[u]`, each `ci` an integer or
//!   a `{...}` literal.
//!
//! A line with any `[...]` coefficient describes a surface over `F_{p^k}(u)`.

use std::sync::Arc;

use crate::experiment::FamilyForm;
use crate::gf::{field, Elem, Field, UniPoly};
use crate::surface::CubicForm;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceInput {
    Finite(CubicForm),
    Family(FamilyForm),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceLine {
    /// 1-based line number in the source.
    pub line: usize,
    pub text: String,
    pub surface: SurfaceInput,
}

enum Literal {
    Elem(Elem),
    Poly(UniPoly),
}

/// Parse every surface in a file.
pub fn parse_surface_file(src: &str) -> Result<Vec<SurfaceLine>> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let surface = parse_surface(text).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        out.push(SurfaceLine { line: i + 1, text: text.to_string(), surface });
    }
    Ok(out)
}

/// Parse a single `p k : c1,...,c20` description.
pub fn parse_surface(text: &str) -> Result<SurfaceInput> {
    let (head, body) = text.split_once(':').ok_or_else(|| parse_err("expected `p k : coefficients`"))?;
    let nums: Vec<&str> = head.split_whitespace().collect();
    let [p, k] = nums[..] else { return Err(parse_err("expected `p k` before the colon")) };
    let p: u64 = p.parse().map_err(|_| parse_err(format!("bad characteristic {p:?}")))?;
    let k: u32 = k.parse().map_err(|_| parse_err(format!("bad extension degree {k:?}")))?;
    let f = field(p, k)?;
    let items = split_top_level(body)?;
    if items.len() != 20 {
        return Err(parse_err(format!("expected 20 coefficients, found {}", items.len())));
    }
    let lits = items.iter().map(|s| literal(s, &f)).collect::<Result<Vec<_>>>()?;
    if lits.iter().any(|l| matches!(l, Literal::Poly(_))) {
        let coeffs = lits
            .into_iter()
            .map(|l| match l {
                Literal::Elem(e) => UniPoly::constant(e),
                Literal::Poly(p) => p,
            })
            .collect();
        Ok(SurfaceInput::Family(FamilyForm::new(f, coeffs)?))
    } else {
        let coeffs: Vec<Elem> = lits
            .into_iter()
            .map(|l| match l {
                Literal::Elem(e) => e,
                Literal::Poly(_) => unreachable!(),
            })
            .collect();
        Ok(SurfaceInput::Finite(CubicForm::new(f, &coeffs)?))
    }
}

fn parse_err(m: impl Into<String>) -> Error {
    Error::Parse { line: 0, message: m.into() }
}

/// Split on commas outside brackets and braces.
fn split_top_level(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(parse_err("unbalanced brackets"));
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(parse_err("unbalanced brackets"));
    }
    out.push(cur.trim().to_string());
    Ok(out)
}

fn element(s: &str, f: &Arc<Field>) -> Result<Elem> {
    if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let coords = inner
            .split(',')
            .map(|c| c.trim().parse::<i64>().map(|v| v.rem_euclid(f.p() as i64) as u32))
            .collect::<std::result::Result<Vec<u32>, _>>()
            .map_err(|_| parse_err(format!("bad field element {s:?}")))?;
        if coords.len() > f.k() as usize {
            return Err(parse_err(format!("{s:?} has more than {} coordinates", f.k())));
        }
        return f.from_coords(&coords);
    }
    let n: i64 = s.parse().map_err(|_| parse_err(format!("bad coefficient {s:?}")))?;
    Ok(f.from_int(n))
}

fn literal(s: &str, f: &Arc<Field>) -> Result<Literal> {
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let coeffs = split_top_level(inner)?
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| element(c, f))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Literal::Poly(UniPoly::new(coeffs)));
    }
    Ok(Literal::Elem(element(s, f)?))
}
