//! Complex structure equations `dφ^k = Σ c φ^a ∧ φ^b̄ + …`: parsing,
//! canonical emission and conversion to real structure constants.
//!
//! ```text
//! file   := header line*
//! header := "dim" INT
//! line   := "param" NAME "=" COMPLEX | "dphi" INT "=" expr
//! expr   := "0" | term ("+" term)*
//! term   := (COMPLEX | NAME) "*" wedge | wedge
//! wedge  := atom "^" atom | "(" expr ")"
//! atom   := "phi" INT | "phibar" INT
//! COMPLEX := "(" FLOAT "," FLOAT ")"
//! ```
//!
//! `#` starts a comment; `φ` and `φ̄` are accepted for `phi` and `phibar`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::lie::LieAlgebra;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Atom {
    Phi(usize),
    PhiBar(usize),
}

impl Atom {
    fn index(self) -> usize {
        match self {
            Atom::Phi(k) | Atom::PhiBar(k) => k,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Phi(k) => write!(f, "phi{k}"),
            Atom::PhiBar(k) => write!(f, "phibar{k}"),
        }
    }
}

/// A product of a literal and named parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub literal: Complex64,
    pub params: Vec<String>,
}

impl Coefficient {
    fn one() -> Self {
        Self { literal: Complex64::new(1.0, 0.0), params: Vec::new() }
    }

    fn times(&self, other: &Coefficient) -> Self {
        let mut params = self.params.clone();
        params.extend(other.params.iter().cloned());
        params.sort();
        Self { literal: self.literal * other.literal, params }
    }

    pub fn evaluate(&self, params: &BTreeMap<String, Complex64>) -> Result<Complex64> {
        let mut v = self.literal;
        for p in &self.params {
            v *= params
                .get(p)
                .ok_or_else(|| Error::StructureEquations(format!("unknown parameter {p}")))?;
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: Coefficient,
    pub left: Atom,
    pub right: Atom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureEquationSpec {
    /// Complex dimension.
    pub n: usize,
    /// Parameters in declaration order.
    pub params: Vec<(String, Complex64)>,
    /// `equations[k - 1]` lists the terms of `dφ^k`.
    pub equations: Vec<Vec<Term>>,
}

impl StructureEquationSpec {
    pub fn term_counts(&self) -> Vec<usize> {
        self.equations.iter().map(Vec::len).collect()
    }

    pub fn param_map(&self) -> BTreeMap<String, Complex64> {
        self.params.iter().cloned().collect()
    }

    pub fn set_param(&mut self, name: &str, value: Complex64) -> Result<()> {
        match self.params.iter_mut().find(|(p, _)| p == name) {
            Some(slot) => {
                slot.1 = value;
                Ok(())
            }
            None => Err(Error::StructureEquations(format!("unknown parameter {name}"))),
        }
    }

    /// Orders each wedge (`φ` before `φ̄`, then by index), merges repeated
    /// pairs with equal parameter sets, drops zero terms and sorts.
    pub fn canonicalize(&self) -> Self {
        let equations = self
            .equations
            .iter()
            .map(|eq| {
                let mut merged: Vec<Term> = Vec::new();
                for t in eq {
                    if t.left == t.right {
                        continue;
                    }
                    let (left, right, sign) = if t.left <= t.right { (t.left, t.right, 1.0) } else { (t.right, t.left, -1.0) };
                    let coefficient = Coefficient { literal: t.coefficient.literal * sign, params: t.coefficient.params.clone() };
                    match merged
                        .iter_mut()
                        .find(|m| m.left == left && m.right == right && m.coefficient.params == coefficient.params)
                    {
                        Some(m) => m.coefficient.literal += coefficient.literal,
                        None => merged.push(Term { coefficient, left, right }),
                    }
                }
                merged.retain(|t| t.coefficient.literal != Complex64::new(0.0, 0.0));
                // -0.0 would print differently from 0.0
                for t in &mut merged {
                    t.coefficient.literal += Complex64::new(0.0, 0.0);
                }
                merged.sort_by(|a, b| (a.left, a.right, &a.coefficient.params).cmp(&(b.left, b.right, &b.coefficient.params)));
                merged
            })
            .collect();
        Self { n: self.n, params: self.params.clone(), equations }
    }

    /// Rejects degenerate wedges (`φ^a ∧ φ^a`) and equations that cancel to
    /// nothing although terms were written.
    pub fn validate(&self) -> Result<()> {
        for (k, eq) in self.equations.iter().enumerate() {
            for t in eq {
                if t.left == t.right {
                    return Err(Error::StructureEquations(format!("dphi{}: {} ^ {} vanishes", k + 1, t.left, t.right)));
                }
                for a in [t.left, t.right] {
                    if a.index() == 0 || a.index() > self.n {
                        return Err(Error::StructureEquations(format!("dphi{}: index {} out of range", k + 1, a.index())));
                    }
                }
                for p in &t.coefficient.params {
                    if !self.params.iter().any(|(q, _)| q == p) {
                        return Err(Error::StructureEquations(format!("unknown parameter {p}")));
                    }
                }
            }
        }
        let canon = self.canonicalize();
        for (k, (raw, c)) in self.equations.iter().zip(&canon.equations).enumerate() {
            if !raw.is_empty() && c.is_empty() {
                return Err(Error::StructureEquations(format!("dphi{} cancels to zero", k + 1)));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Dim,
    Param,
    Dphi(usize),
    Phi(usize),
    PhiBar(usize),
    Name(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Plus,
    Star,
    Caret,
    Eq,
    Newline,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn lex(text: &str) -> std::result::Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (li, raw_line) in text.lines().enumerate() {
        let line = li + 1;
        let chars: Vec<char> = raw_line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, column });
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    i += 1;
                }
                '(' | ')' | ',' | '+' | '*' | '^' | '=' => {
                    let tok = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '+' => Tok::Plus,
                        '*' => Tok::Star,
                        '^' => Tok::Caret,
                        _ => Tok::Eq,
                    };
                    push(&mut out, tok);
                    i += 1;
                }
                '∧' => {
                    push(&mut out, Tok::Caret);
                    i += 1;
                }
                'φ' => {
                    i += 1;
                    let bar = chars.get(i) == Some(&'\u{304}');
                    if bar {
                        i += 1;
                    }
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(err(line, column, "expected an index after φ"));
                    }
                    let k: usize = chars[start..i].iter().collect::<String>().parse().map_err(|_| err(line, column, "bad index"))?;
                    push(&mut out, if bar { Tok::PhiBar(k) } else { Tok::Phi(k) });
                }
                c if c.is_ascii_digit() || c == '-' || c == '.' => {
                    let start = i;
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '.' | '-' | '+'))
                    {
                        // Only allow a sign directly after an exponent marker.
                        if matches!(chars[i], '-' | '+') && !matches!(chars[i - 1], 'e' | 'E') {
                            break;
                        }
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let v: f64 = s.parse().map_err(|_| err(line, column, format!("malformed number '{s}'")))?;
                    push(&mut out, Tok::Number(v));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let tok = keyword(&word).map_err(|m| err(line, column, m))?;
                    push(&mut out, tok);
                }
                other => return Err(err(line, column, format!("unexpected character '{other}'"))),
            }
        }
        out.push(Spanned { tok: Tok::Newline, line, column: chars.len() + 1 });
    }
    Ok(out)
}

fn keyword(word: &str) -> std::result::Result<Tok, String> {
    let indexed = |prefix: &str| -> Option<std::result::Result<usize, String>> {
        let rest = word.strip_prefix(prefix)?;
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        Some(rest.parse().map_err(|_| format!("bad index in '{word}'")))
    };
    Ok(match word {
        "dim" => Tok::Dim,
        "param" => Tok::Param,
        _ => {
            if let Some(k) = indexed("dphi") {
                Tok::Dphi(k?)
            } else if let Some(k) = indexed("phibar") {
                Tok::PhiBar(k?)
            } else if let Some(k) = indexed("phi") {
                Tok::Phi(k?)
            } else {
                Tok::Name(word.to_string())
            }
        }
    })
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    n: usize,
    params: Vec<(String, Complex64)>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Spanned {
        let t = self.peek().clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect(&mut self, want: &Tok, what: &str) -> std::result::Result<Spanned, ParseError> {
        let t = self.next();
        if &t.tok != want {
            return Err(err(t.line, t.column, format!("expected {what}")));
        }
        Ok(t)
    }

    fn skip_newlines(&mut self) {
        while !self.at_end() && self.peek().tok == Tok::Newline {
            self.pos += 1;
        }
    }

    fn end_of_line(&mut self) -> std::result::Result<(), ParseError> {
        let t = self.next();
        if t.tok != Tok::Newline {
            return Err(err(t.line, t.column, "expected end of line"));
        }
        Ok(())
    }

    fn complex(&mut self) -> std::result::Result<Complex64, ParseError> {
        self.expect(&Tok::LParen, "'('")?;
        let re = self.number()?;
        self.expect(&Tok::Comma, "','")?;
        let im = self.number()?;
        self.expect(&Tok::RParen, "')'")?;
        Ok(Complex64::new(re, im))
    }

    fn number(&mut self) -> std::result::Result<f64, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Number(v) => Ok(v),
            _ => Err(err(t.line, t.column, "expected a number")),
        }
    }

    fn atom(&mut self) -> std::result::Result<Atom, ParseError> {
        let t = self.next();
        let a = match t.tok {
            Tok::Phi(k) => Atom::Phi(k),
            Tok::PhiBar(k) => Atom::PhiBar(k),
            _ => return Err(err(t.line, t.column, "expected phi<k> or phibar<k>")),
        };
        if a.index() == 0 || a.index() > self.n {
            return Err(err(t.line, t.column, format!("index {} out of range 1..={}", a.index(), self.n)));
        }
        Ok(a)
    }

    /// Is the `(` at the cursor the start of a complex literal?
    fn complex_ahead(&self) -> bool {
        matches!(self.toks.get(self.pos + 1).map(|s| &s.tok), Some(Tok::Number(_)))
            && matches!(self.toks.get(self.pos + 2).map(|s| &s.tok), Some(Tok::Comma))
    }

    fn wedge(&mut self, coef: &Coefficient, out: &mut Vec<Term>) -> std::result::Result<(), ParseError> {
        if self.peek().tok == Tok::LParen {
            self.next();
            self.expr(coef, out)?;
            self.expect(&Tok::RParen, "')'")?;
            return Ok(());
        }
        let left = self.atom()?;
        self.expect(&Tok::Caret, "'^'")?;
        let right = self.atom()?;
        out.push(Term { coefficient: coef.clone(), left, right });
        Ok(())
    }

    fn term(&mut self, outer: &Coefficient, out: &mut Vec<Term>) -> std::result::Result<(), ParseError> {
        let t = self.peek().clone();
        let coef = match &t.tok {
            Tok::LParen if self.complex_ahead() => {
                let c = self.complex()?;
                self.expect(&Tok::Star, "'*'")?;
                Coefficient { literal: c, params: Vec::new() }
            }
            Tok::Name(name) => {
                if !self.params.iter().any(|(p, _)| p == name) {
                    return Err(err(t.line, t.column, format!("unknown parameter '{name}'")));
                }
                self.next();
                self.expect(&Tok::Star, "'*'")?;
                Coefficient { literal: Complex64::new(1.0, 0.0), params: vec![name.clone()] }
            }
            _ => Coefficient::one(),
        };
        self.wedge(&outer.times(&coef), out)
    }

    fn expr(&mut self, outer: &Coefficient, out: &mut Vec<Term>) -> std::result::Result<(), ParseError> {
        if let Tok::Number(v) = self.peek().tok {
            let t = self.next();
            if v != 0.0 {
                return Err(err(t.line, t.column, "the only bare number allowed is 0"));
            }
            return Ok(());
        }
        self.term(outer, out)?;
        while self.peek().tok == Tok::Plus {
            self.next();
            self.term(outer, out)?;
        }
        Ok(())
    }
}

pub fn parse(text: &str) -> std::result::Result<StructureEquationSpec, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, n: 0, params: Vec::new() };
    p.skip_newlines();
    if p.at_end() {
        return Err(err(1, 1, "empty file: expected 'dim <n>'"));
    }
    p.expect(&Tok::Dim, "'dim' header")?;
    let t = p.next();
    let n = match t.tok {
        Tok::Number(v) if v.fract() == 0.0 && (1.0..=15.0).contains(&v) => v as usize,
        _ => return Err(err(t.line, t.column, "expected a complex dimension between 1 and 15")),
    };
    p.n = n;
    p.end_of_line()?;
    let mut equations: Vec<Option<Vec<Term>>> = vec![None; n];
    loop {
        p.skip_newlines();
        if p.at_end() {
            break;
        }
        let t = p.next();
        match t.tok {
            Tok::Param => {
                let nt = p.next();
                let name = match nt.tok {
                    Tok::Name(s) => s,
                    _ => return Err(err(nt.line, nt.column, "expected a parameter name")),
                };
                if p.params.iter().any(|(q, _)| *q == name) {
                    return Err(err(nt.line, nt.column, format!("parameter '{name}' declared twice")));
                }
                p.expect(&Tok::Eq, "'='")?;
                let c = p.complex()?;
                p.params.push((name, c));
            }
            Tok::Dphi(k) => {
                if k == 0 || k > n {
                    return Err(err(t.line, t.column, format!("dphi{k} out of range 1..={n}")));
                }
                if equations[k - 1].is_some() {
                    return Err(err(t.line, t.column, format!("dphi{k} defined twice")));
                }
                p.expect(&Tok::Eq, "'='")?;
                let mut terms = Vec::new();
                p.expr(&Coefficient::one(), &mut terms)?;
                equations[k - 1] = Some(terms);
            }
            _ => return Err(err(t.line, t.column, "expected 'param' or 'dphi<k>'")),
        }
        p.end_of_line()?;
    }
    Ok(StructureEquationSpec {
        n,
        params: p.params,
        equations: equations.into_iter().map(Option::unwrap_or_default).collect(),
    })
}

fn fmt_complex(c: Complex64) -> String {
    format!("({:?},{:?})", c.re, c.im)
}

/// Canonical text; `parse(emit(spec)) == spec.canonicalize()`.
pub fn emit(spec: &StructureEquationSpec) -> String {
    let spec = spec.canonicalize();
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", spec.n);
    for (name, c) in &spec.params {
        let _ = writeln!(out, "param {name} = {}", fmt_complex(*c));
    }
    for (k, eq) in spec.equations.iter().enumerate() {
        let _ = write!(out, "dphi{} = ", k + 1);
        if eq.is_empty() {
            out.push('0');
        }
        for (i, t) in eq.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let mut body = format!("{}^{}", t.left, t.right);
            if t.coefficient.literal != Complex64::new(1.0, 0.0) {
                body = format!("{}*{body}", fmt_complex(t.coefficient.literal));
            }
            for p in t.coefficient.params.iter().rev() {
                body = if body.contains('*') { format!("{p}*({body})") } else { format!("{p}*{body}") };
            }
            out.push_str(&body);
        }
        out.push('\n');
    }
    out
}

/// `φ^k = e^{2k} + i e^{2k+1}` (0-based real basis), so that `J` is
/// [`ComplexStructure::interleaved`] and `φ^k ∘ J = i φ^k`.
pub fn coframe(n: usize) -> Vec<KForm> {
    (0..n)
        .map(|k| {
            let mut v = DVector::zeros(2 * n);
            v[2 * k] = Complex64::new(1.0, 0.0);
            v[2 * k + 1] = Complex64::new(0.0, 1.0);
            KForm::complex_covector(&v)
        })
        .collect()
}

fn atom_form(frame: &[KForm], a: Atom) -> KForm {
    match a {
        Atom::Phi(k) => frame[k - 1].clone(),
        Atom::PhiBar(k) => frame[k - 1].conj(),
    }
}

/// `dφ^k` as complex 2-forms on the real basis.
pub fn differentials(spec: &StructureEquationSpec) -> Result<Vec<KForm>> {
    let frame = coframe(spec.n);
    let params = spec.param_map();
    spec.equations
        .iter()
        .map(|eq| {
            let mut acc = KForm::zero(2 * spec.n, 2)?;
            for t in eq {
                let c = t.coefficient.evaluate(&params)?;
                let w = atom_form(&frame, t.left).wedge(&atom_form(&frame, t.right))?;
                acc = acc.add(&w.scale(c))?;
            }
            Ok(acc)
        })
        .collect()
}

/// Real structure constants from `de^m(e_i, e_j) = -c_{ij}^m`, with
/// `e^{2k} = Re φ^k` and `e^{2k+1} = Im φ^k`.
pub fn realify(spec: &StructureEquationSpec) -> Result<(LieAlgebra, ComplexStructure)> {
    spec.validate()?;
    let n = spec.n;
    let dim = 2 * n;
    let dphi = differentials(spec)?;
    let mut raw = vec![0.0; dim * dim * dim];
    for (k, form) in dphi.iter().enumerate() {
        let re = form.real_part();
        let im = form.imag_part();
        for i in 0..dim {
            for jx in 0..dim {
                if i == jx {
                    continue;
                }
                raw[(i * dim + jx) * dim + 2 * k] = -re.eval_basis(&[i, jx]).re;
                raw[(i * dim + jx) * dim + 2 * k + 1] = -im.eval_basis(&[i, jx]).re;
            }
        }
    }
    let lie = LieAlgebra::from_structure_constants(dim, &raw)?;
    let scale = raw.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let jac = lie.jacobi_residual();
    if jac > 1e-12 * scale * scale {
        return Err(Error::StructureEquations(format!("d² ≠ 0 (Jacobi residual {jac:.3e})")));
    }
    let j = ComplexStructure::interleaved(n);
    let nij = crate::complex::nijenhuis_residual(&lie, &j)?;
    if nij > 1e-12 * scale {
        return Err(Error::StructureEquations(format!("complex structure is not integrable ({nij:.3e})")));
    }
    Ok((lie, j))
}

/// `max_k |d φ^k - (given dφ^k)|` through the Chevalley–Eilenberg differential
/// of the recovered algebra.
pub fn round_trip_residual(spec: &StructureEquationSpec, lie: &LieAlgebra) -> Result<f64> {
    let frame = coframe(spec.n);
    let given = differentials(spec)?;
    let mut worst: f64 = 0.0;
    for (phi, want) in frame.iter().zip(&given) {
        worst = worst.max(phi.ce_differential(lie)?.distance(want)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::EXAMPLE8_SEQ;

    #[test]
    fn minimal_file_gives_abelian_plane() {
        let spec = parse("dim 1\ndphi1 = 0\n").unwrap();
        assert_eq!(spec.n, 1);
        let (lie, j) = realify(&spec).unwrap();
        assert_eq!(lie.dim(), 2);
        assert!(lie.is_abelian());
        assert_eq!(j.matrix(), ComplexStructure::interleaved(1).matrix());
    }

    #[test]
    fn missing_equations_default_to_zero() {
        let spec = parse("dim 3\n").unwrap();
        assert_eq!(spec.term_counts(), vec![0, 0, 0]);
    }

    #[test]
    fn example_term_counts() {
        let spec = parse(EXAMPLE8_SEQ).unwrap();
        assert_eq!(spec.n, 4);
        assert_eq!(spec.term_counts(), vec![0, 0, 1, 5]);
        assert_eq!(spec.params.len(), 3);
    }

    #[test]
    fn single_mixed_term() {
        let spec = parse("dim 2\ndphi2 = phi1^phibar1\n").unwrap();
        let (lie, _) = realify(&spec).unwrap();
        assert_eq!(lie.brackets(), vec![(0, 1, 3, 2.0)]);
        assert!(round_trip_residual(&spec, &lie).unwrap() < 1e-14);
    }

    #[test]
    fn unicode_atoms() {
        let a = parse("dim 2\ndphi2 = φ1^φ̄1\n").unwrap();
        let b = parse("dim 2\ndphi2 = phi1^phibar1\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_wedge_fails_validation() {
        let spec = parse("dim 1\ndphi1 = phi1^phi1\n").unwrap();
        assert!(matches!(spec.validate(), Err(Error::StructureEquations(_))));
        assert!(realify(&spec).is_err());
    }

    #[test]
    fn cancelling_equation_fails_validation() {
        let spec = parse("dim 2\ndphi2 = phi1^phibar1 + (-1,0)*phi1^phibar1\n").unwrap();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn non_closed_system_is_rejected() {
        // d(dφ³) = φ^1 ∧ φ^{2} ∧ φ̄^1 ≠ 0
        let spec = parse("dim 3\ndphi2 = phi1^phibar1\ndphi3 = phi2^phibar1\ndphi1 = phi2^phibar2\n").unwrap();
        assert!(realify(&spec).is_err());
    }

    #[test]
    fn emit_round_trip() {
        let spec = parse(EXAMPLE8_SEQ).unwrap();
        let text = emit(&spec);
        let back = parse(&text).unwrap();
        assert_eq!(back, spec.canonicalize());
        assert_eq!(emit(&back), text);
    }

    #[test]
    fn error_positions() {
        let e = parse("").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse("dim 2\ndphi3 = 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse("dim 2\ndphi2 = 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 9));
        let e = parse("dim 2\nparam a = (1,0)\nparam a = (2,0)\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn parameters() {
        let mut spec = parse(EXAMPLE8_SEQ).unwrap();
        spec.set_param("D31", Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(spec.param_map()["D31"], Complex64::new(2.0, 0.0));
        assert!(spec.set_param("D99", Complex64::new(1.0, 0.0)).is_err());
    }
}
