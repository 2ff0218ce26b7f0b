//! Exact noncommutative polynomial arithmetic.
//!
//! Words are sequences of generator indices compared by length first, then
//! lexicographically, so the maximal term of a polynomial is compatible with
//! concatenation on either side. Coefficients are Gaussian rationals; every
//! reduction step and every certificate coefficient stays exact.

use num::{BigInt, BigRational, Complex, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Coef = Complex<BigRational>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn coef_real(n: i64) -> Coef {
    Complex::new(rat(n), rat(0))
}

pub fn coef_i() -> Coef {
    Complex::new(rat(0), rat(1))
}

pub fn coef_inv(c: &Coef) -> Coef {
    Coef::one() / c.clone()
}

/// A product of generators, indexed from zero. The empty word is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(g: u32) -> Self {
        Word(vec![g])
    }

    pub fn from_slice(gs: &[u32]) -> Self {
        Word(gs.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, rhs: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + rhs.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&rhs.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    /// Leftmost occurrence of `pat` at or after `from`; `pat` must be nonempty.
    pub fn find(&self, pat: &Word, from: usize) -> Option<usize> {
        let (n, m) = (self.len(), pat.len());
        if m == 0 || m > n {
            return None;
        }
        (from..=n - m).find(|&i| self.0[i..i + m] == pat.0[..])
    }

    pub fn slice(&self, lo: usize, hi: usize) -> Word {
        Word(self.0[lo..hi].to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite Gaussian-rational combination of words. The term map never holds
/// zero coefficients.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct NcPoly {
    terms: BTreeMap<Word, Coef>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly::default()
    }

    pub fn one() -> Self {
        NcPoly::from_word(Word::empty())
    }

    pub fn scalar(c: Coef) -> Self {
        NcPoly::from_term(Word::empty(), c)
    }

    pub fn from_word(w: Word) -> Self {
        NcPoly::from_term(w, Coef::one())
    }

    pub fn from_term(w: Word, c: Coef) -> Self {
        let mut p = NcPoly::zero();
        p.insert_add(w, c);
        p
    }

    pub fn letter(g: u32) -> Self {
        NcPoly::from_word(Word::letter(g))
    }

    /// x_u x_v - x_v x_u.
    pub fn commutator(u: u32, v: u32) -> Self {
        let uv = Word::from_slice(&[u, v]);
        let vu = Word::from_slice(&[v, u]);
        &NcPoly::from_word(uv) - &NcPoly::from_word(vu)
    }

    pub fn insert_add(&mut self, w: Word, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> std::collections::btree_map::Iter<'_, Word, Coef> {
        self.terms.iter()
    }

    /// The maximal term under the length-then-lex order.
    pub fn leading(&self) -> Option<(&Word, &Coef)> {
        self.terms.iter().next_back()
    }

    pub fn coef(&self, w: &Word) -> Option<&Coef> {
        self.terms.get(w)
    }

    pub fn degree(&self) -> Option<usize> {
        self.leading().map(|(w, _)| w.len())
    }

    pub fn max_letter(&self) -> Option<u32> {
        self.terms.keys().flat_map(|w| w.0.iter().copied()).max()
    }

    pub fn scale(&self, c: &Coef) -> NcPoly {
        if c.is_zero() {
            return NcPoly::zero();
        }
        let mut out = NcPoly::zero();
        for (w, k) in &self.terms {
            out.terms.insert(w.clone(), k.clone() * c.clone());
        }
        out
    }

    /// l * self * r for words l, r.
    pub fn mul_words(&self, l: &Word, r: &Word) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            out.terms.insert(l.concat(w).concat(r), c.clone());
        }
        out
    }

    /// Reverses every word and conjugates every coefficient; this is the
    /// involution fixing each generator.
    pub fn adjoint(&self) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            out.insert_add(w.reversed(), c.conj());
        }
        out
    }

    pub fn render(&self, name: &dyn Fn(u32) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        // highest degree first, alphabetical within a degree
        let mut terms: Vec<(&Word, &Coef)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        for (w, c) in terms {
            let t = render_term(c, w, name);
            if out.is_empty() {
                out.push_str(&t);
            } else if let Some(rest) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&t);
            }
        }
        out
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|g| format!("g{g}")))
    }
}

impl std::ops::Neg for &NcPoly {
    type Output = NcPoly;
    fn neg(self) -> NcPoly {
        self.scale(&(-Coef::one()))
    }
}

impl std::ops::Add for &NcPoly {
    type Output = NcPoly;
    fn add(self, rhs: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.insert_add(w.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &NcPoly {
    type Output = NcPoly;
    fn sub(self, rhs: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.insert_add(w.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &NcPoly {
    type Output = NcPoly;
    fn mul(self, rhs: &NcPoly) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &rhs.terms {
                out.insert_add(w1.concat(w2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

fn render_rat(r: &BigRational) -> String {
    r.to_string()
}

/// Scalar rendering: `1`, `-3/2`, `i`, `-i`, `2*i`, `(1+i)`, `(1/2-3*i)`.
pub fn render_coef(c: &Coef) -> String {
    let (re, im) = (&c.re, &c.im);
    if im.is_zero() {
        render_rat(re)
    } else if re.is_zero() {
        if im.is_one() {
            "i".to_string()
        } else if (-im).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", render_rat(im))
        }
    } else {
        let sign = if im.is_negative() { '-' } else { '+' };
        let mag = im.abs();
        if mag.is_one() {
            format!("({}{}i)", render_rat(re), sign)
        } else {
            format!("({}{}{}*i)", render_rat(re), sign, render_rat(&mag))
        }
    }
}

pub fn render_word(w: &Word, name: &dyn Fn(u32) -> String) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.0.iter().map(|&g| name(g)).collect::<Vec<_>>().join(".")
}

fn render_term(c: &Coef, w: &Word, name: &dyn Fn(u32) -> String) -> String {
    if w.is_empty() {
        return render_coef(c);
    }
    let word = render_word(w, name);
    if c.is_one() {
        word
    } else if (-c.clone()).is_one() {
        format!("-{word}")
    } else {
        format!("{}*{}", render_coef(c), word)
    }
}

fn parse_rat(s: &str) -> Result<BigRational, String> {
    s.parse::<BigRational>().map_err(|e| format!("bad rational {s:?}: {e}"))
}

/// Inverse of [`render_coef`] for a standalone scalar chunk.
fn parse_scalar_chunk(s: &str) -> Result<Coef, String> {
    if s == "i" {
        return Ok(coef_i());
    }
    if s == "-i" {
        return Ok(-coef_i());
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        // split into real and imaginary at the first interior sign
        let bytes = inner.as_bytes();
        let cut = (1..bytes.len())
            .find(|&k| bytes[k] == b'+' || bytes[k] == b'-')
            .ok_or_else(|| format!("bad complex scalar {s:?}"))?;
        let re = parse_rat(&inner[..cut])?;
        let neg = bytes[cut] == b'-';
        let imtext = &inner[cut + 1..];
        let mag = if imtext == "i" {
            BigRational::one()
        } else {
            let t = imtext
                .strip_suffix("*i")
                .ok_or_else(|| format!("bad imaginary part in {s:?}"))?;
            parse_rat(t)?
        };
        let im = if neg { -mag } else { mag };
        return Ok(Complex::new(re, im));
    }
    if let Some(t) = s.strip_suffix("*i") {
        return Ok(Complex::new(BigRational::zero(), parse_rat(t)?));
    }
    Ok(Complex::new(parse_rat(s)?, BigRational::zero()))
}

/// Groups dot-separated chunks back into generator names, longest first.
/// Names may themselves contain dots, so this searches greedily with
/// backtracking and returns the leftmost-longest grouping.
fn parse_word_chunks(
    chunks: &[&str],
    lookup: &dyn Fn(&str) -> Option<u32>,
) -> Option<Vec<u32>> {
    if chunks.is_empty() {
        return Some(Vec::new());
    }
    for take in (1..=chunks.len()).rev() {
        let candidate = chunks[..take].join(".");
        if let Some(g) = lookup(&candidate) {
            if let Some(mut rest) = parse_word_chunks(&chunks[take..], lookup) {
                let mut out = vec![g];
                out.append(&mut rest);
                return Some(out);
            }
        }
    }
    None
}

pub fn parse_word(s: &str, lookup: &dyn Fn(&str) -> Option<u32>) -> Result<Word, String> {
    if s == "1" {
        return Ok(Word::empty());
    }
    let chunks: Vec<&str> = s.split('.').collect();
    parse_word_chunks(&chunks, lookup)
        .map(Word)
        .ok_or_else(|| format!("cannot resolve word {s:?}"))
}

/// Splits on `sep` at paren depth zero.
fn split_depth0<'a>(s: &'a str, sep: char) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_term(
    s: &str,
    lookup: &dyn Fn(&str) -> Option<u32>,
) -> Result<(Word, Coef), String> {
    let mut rest = s.trim();
    let mut coef = Coef::one();
    if rest == "-" {
        return Err("dangling sign".to_string());
    }
    // "-i" and "-3/2" are scalar chunks of their own; only strip the sign
    // when what follows is a word or a parenthesized scalar.
    if let Some(r) = rest.strip_prefix('-') {
        let first = split_depth0(r, '*')[0].trim();
        if r.starts_with('(') || parse_word(first, lookup).is_ok() {
            coef = -coef;
            rest = r;
        }
    }
    let mut word = Word::empty();
    for chunk in split_depth0(rest, '*') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            return Err(format!("empty factor in term {s:?}"));
        }
        let looks_scalar = chunk == "i"
            || chunk == "-i"
            || chunk.starts_with('(')
            || chunk.starts_with(|c: char| c.is_ascii_digit())
            || chunk.starts_with('-');
        // a known generator name wins over scalar interpretation
        if let Ok(w) = parse_word(chunk, lookup) {
            word = word.concat(&w);
        } else if looks_scalar {
            coef = coef * parse_scalar_chunk(chunk)?;
        } else {
            return Err(format!("cannot resolve factor {chunk:?} in term {s:?}"));
        }
    }
    Ok((word, coef))
}

/// Inverse of [`NcPoly::render`] with respect to a name table.
pub fn parse_poly(s: &str, lookup: &dyn Fn(&str) -> Option<u32>) -> Result<NcPoly, String> {
    let s = s.trim();
    if s == "0" {
        return Ok(NcPoly::zero());
    }
    let mut out = NcPoly::zero();
    // split on " + " and " - " while tracking the sign of each piece
    let mut sign = Coef::one();
    let mut buf = String::new();
    let mut pieces: Vec<(Coef, String)> = Vec::new();
    let mut chars = s.chars().peekable();
    let mut depth = 0usize;
    while let Some(c) = chars.next() {
        match c {
            '(' => {
                depth += 1;
                buf.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                buf.push(c);
            }
            ' ' if depth == 0 => {
                let op = chars.next();
                let space = chars.next();
                match (op, space) {
                    (Some('+'), Some(' ')) => {
                        pieces.push((sign.clone(), std::mem::take(&mut buf)));
                        sign = Coef::one();
                    }
                    (Some('-'), Some(' ')) => {
                        pieces.push((sign.clone(), std::mem::take(&mut buf)));
                        sign = -Coef::one();
                    }
                    _ => return Err(format!("bad separator in {s:?}")),
                }
            }
            _ => buf.push(c),
        }
    }
    pieces.push((sign, buf));
    for (sg, piece) in pieces {
        let (w, c) = parse_term(&piece, lookup)?;
        out.insert_add(w, c * sg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(gs: &[u32]) -> Word {
        Word::from_slice(gs)
    }

    #[test]
    fn word_order_is_length_then_lex() {
        assert!(w(&[3]) < w(&[0, 0]));
        assert!(w(&[0, 2]) < w(&[1, 0]));
        assert!(w(&[1, 0]) < w(&[1, 1]));
        assert!(w(&[]) < w(&[0]));
        // compatible with concatenation on both sides
        let (a, b, c) = (w(&[0, 2]), w(&[1, 0]), w(&[2, 1]));
        assert!(c.concat(&a) < c.concat(&b));
        assert!(a.concat(&c) < b.concat(&c));
    }

    #[test]
    fn find_is_leftmost() {
        let h = w(&[0, 1, 0, 1, 0]);
        assert_eq!(h.find(&w(&[0, 1]), 0), Some(0));
        assert_eq!(h.find(&w(&[0, 1]), 1), Some(2));
        assert_eq!(h.find(&w(&[1, 1]), 0), None);
        assert_eq!(h.find(&w(&[0, 1, 0, 1, 0]), 0), Some(0));
    }

    #[test]
    fn arithmetic_basics() {
        let x = NcPoly::letter(0);
        let y = NcPoly::letter(1);
        let xy = &x * &y;
        let yx = &y * &x;
        assert_ne!(xy, yx);
        let comm = &xy - &yx;
        assert_eq!(comm, NcPoly::commutator(0, 1));
        assert_eq!(&comm + &(&yx - &xy), NcPoly::zero());
        let sq = &(&x + &y) * &(&x + &y);
        assert_eq!(sq.num_terms(), 4);
        assert_eq!(sq.coef(&w(&[0, 1])), Some(&Coef::one()));
        assert_eq!(sq.leading().unwrap().0, &w(&[1, 1]));
    }

    #[test]
    fn adjoint_is_an_antihomomorphism() {
        let p = &(&NcPoly::letter(0) * &NcPoly::letter(1)) + &NcPoly::scalar(coef_i());
        let q = &NcPoly::letter(2) - &NcPoly::from_term(w(&[1, 1]), coef_real(3));
        let lhs = (&p * &q).adjoint();
        let rhs = &q.adjoint() * &p.adjoint();
        assert_eq!(lhs, rhs);
        assert_eq!(p.adjoint().adjoint(), p);
        // i conjugates
        assert_eq!(NcPoly::scalar(coef_i()).adjoint(), NcPoly::scalar(-coef_i()));
    }

    #[test]
    fn rendering_reads_naturally() {
        let names = |g: u32| ["x", "y", "z"][g as usize].to_string();
        let p = &NcPoly::commutator(0, 1) + &NcPoly::scalar(coef_real(-2));
        assert_eq!(p.render(&names), "x.y - y.x - 2");
        let q = &NcPoly::from_term(w(&[2]), coef_i()) + &NcPoly::one();
        assert_eq!(q.render(&names), "i*z + 1");
        assert_eq!(NcPoly::zero().render(&names), "0");
        let r = NcPoly::from_term(w(&[0]), Complex::new(rat(1), rat(-2)));
        assert_eq!(r.render(&names), "(1-2*i)*x");
    }

    #[test]
    fn parse_round_trip() {
        let names = ["x", "y", "z", "a.b"];
        let name = |g: u32| names[g as usize].to_string();
        let lookup = |s: &str| names.iter().position(|n| *n == s).map(|k| k as u32);
        let polys = vec![
            NcPoly::zero(),
            NcPoly::one(),
            NcPoly::scalar(-coef_i()),
            NcPoly::commutator(0, 1),
            &NcPoly::from_term(w(&[0, 1, 2]), Complex::new(rat(-3), rat(2)))
                + &NcPoly::from_term(w(&[3, 3]), Complex::new(rat(1), rat(-1)).unscale(rat(2))),
            &NcPoly::from_term(w(&[3, 0]), coef_real(-1)) + &NcPoly::scalar(coef_real(7)),
            NcPoly::from_term(w(&[1]), Complex::new(rat(0), rat(-5))),
        ];
        for p in polys {
            let text = p.render(&name);
            let back = parse_poly(&text, &lookup).unwrap_or_else(|e| panic!("{e} in {text:?}"));
            assert_eq!(back, p, "round trip of {text:?}");
        }
    }

    #[test]
    fn dotted_names_resolve_longest_first() {
        let names = ["a", "b", "a.b"];
        let lookup = |s: &str| names.iter().position(|n| *n == s).map(|k| k as u32);
        // "a.b" prefers the single dotted generator
        let p = parse_poly("a.b", &lookup).unwrap();
        assert_eq!(p, NcPoly::letter(2));
        // but a grouping that only works split apart still parses
        let q = parse_poly("a.b.a", &lookup).unwrap();
        assert_eq!(q, NcPoly::from_word(w(&[2, 0])));
    }
}
