//! Finitely presented groups.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::snf::{smith_diagonal, AbelianGroup};

/// A letter is `±(generator index + 1)`.
pub type Word = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("unknown generator `{0}` in word")]
    UnknownGenerator(String),
    #[error("malformed word `{word}`: {reason}")]
    Malformed { word: String, reason: String },
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

pub fn inverse(w: &[i64]) -> Word {
    w.iter().rev().map(|x| -x).collect()
}

pub fn free_reduce(w: &[i64]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn cyclic_reduce(w: &[i64]) -> Word {
    let mut v = free_reduce(w);
    while v.len() >= 2 && v[0] == -v[v.len() - 1] {
        v.remove(0);
        v.pop();
    }
    v
}

/// Canonical representative of a relator up to cyclic permutation and
/// inversion.
fn canonical(w: &[i64]) -> Word {
    let v = cyclic_reduce(w);
    if v.is_empty() {
        return v;
    }
    let mut best: Option<Word> = None;
    for cand in [v.clone(), inverse(&v)] {
        for k in 0..cand.len() {
            let rot: Word = cand[k..].iter().chain(cand[..k].iter()).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap()
}

pub fn power(w: &[i64], k: i64) -> Word {
    let base = if k < 0 { inverse(w) } else { w.to_vec() };
    let mut out = Vec::new();
    for _ in 0..k.abs() {
        out.extend_from_slice(&base);
    }
    free_reduce(&out)
}

pub fn commutator(a: &[i64], b: &[i64]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    w.extend(inverse(a));
    w.extend(inverse(b));
    free_reduce(&w)
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, GroupError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.clone()) {
                return Err(GroupError::DuplicateGenerator(g.clone()));
            }
        }
        let n = generators.len() as i64;
        for r in &relators {
            if let Some(x) = r.iter().find(|x| **x == 0 || x.abs() > n) {
                return Err(GroupError::UnknownGenerator(format!("#{x}")));
            }
        }
        Ok(GroupPresentation { generators, relators })
    }

    pub fn trivial() -> Self {
        GroupPresentation::default()
    }

    /// Free group on the given names.
    pub fn free(names: &[&str]) -> Self {
        GroupPresentation { generators: names.iter().map(|s| s.to_string()).collect(), relators: vec![] }
    }

    /// `Z^2 = ⟨x, y | [x, y]⟩`.
    pub fn torus(x: &str, y: &str) -> Self {
        GroupPresentation { generators: vec![x.into(), y.into()], relators: vec![commutator(&[1], &[2])] }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// Parse a word such as `a^2 b^-1 [a,b]` or `a*b*a^-1`; `1` is the
    /// empty word.
    pub fn parse_word(&self, s: &str) -> Result<Word, GroupError> {
        let chars: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let w = self.parse_product(&chars, &mut pos, s)?;
        skip_ws(&chars, &mut pos);
        if pos != chars.len() {
            return Err(GroupError::Malformed { word: s.into(), reason: format!("unexpected `{}`", chars[pos]) });
        }
        Ok(free_reduce(&w))
    }

    fn parse_product(&self, c: &[char], pos: &mut usize, src: &str) -> Result<Word, GroupError> {
        let mut out = Vec::new();
        loop {
            skip_ws(c, pos);
            if *pos >= c.len() || c[*pos] == ']' || c[*pos] == ')' || c[*pos] == ',' {
                return Ok(out);
            }
            if c[*pos] == '*' {
                *pos += 1;
                continue;
            }
            let base = self.parse_factor(c, pos, src)?;
            skip_ws(c, pos);
            let mut e = 1;
            if *pos < c.len() && c[*pos] == '^' {
                *pos += 1;
                e = parse_int(c, pos).ok_or_else(|| GroupError::Malformed { word: src.into(), reason: "bad exponent".into() })?;
            }
            out.extend(power(&base, e));
        }
    }

    fn parse_factor(&self, c: &[char], pos: &mut usize, src: &str) -> Result<Word, GroupError> {
        let bad = |r: &str| GroupError::Malformed { word: src.into(), reason: r.into() };
        match c[*pos] {
            '[' => {
                *pos += 1;
                let a = self.parse_product(c, pos, src)?;
                if *pos >= c.len() || c[*pos] != ',' {
                    return Err(bad("expected `,` in commutator"));
                }
                *pos += 1;
                let b = self.parse_product(c, pos, src)?;
                if *pos >= c.len() || c[*pos] != ']' {
                    return Err(bad("expected `]`"));
                }
                *pos += 1;
                Ok(commutator(&a, &b))
            }
            '(' => {
                *pos += 1;
                let a = self.parse_product(c, pos, src)?;
                if *pos >= c.len() || c[*pos] != ')' {
                    return Err(bad("expected `)`"));
                }
                *pos += 1;
                Ok(a)
            }
            '1' => {
                *pos += 1;
                Ok(vec![])
            }
            ch if ch.is_alphabetic() || ch == '_' => {
                let start = *pos;
                while *pos < c.len() && (c[*pos].is_alphanumeric() || c[*pos] == '_' || c[*pos] == '\'') {
                    *pos += 1;
                }
                let name: String = c[start..*pos].iter().collect();
                let i = self.index_of(&name).ok_or(GroupError::UnknownGenerator(name))?;
                Ok(vec![i as i64 + 1])
            }
            ch => Err(bad(&format!("unexpected `{ch}`"))),
        }
    }

    pub fn format_word(&self, w: &[i64]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let g = w[i].abs();
            let s = w[i].signum();
            let mut k = 1;
            while i + k < w.len() && w[i + k] == w[i] {
                k += 1;
            }
            let name = &self.generators[(g - 1) as usize];
            let e = s * k as i64;
            parts.push(if e == 1 { name.clone() } else { format!("{name}^{e}") });
            i += k;
        }
        parts.join(" ")
    }

    /// Free product; generators of `other` that clash get primes appended.
    /// Returns the product and the new names of `other`'s generators.
    pub fn free_product(&self, other: &GroupPresentation) -> (GroupPresentation, Vec<String>) {
        let mut gens = self.generators.clone();
        let mut renamed = Vec::new();
        for g in &other.generators {
            let mut name = g.clone();
            while gens.contains(&name) {
                name.push('\'');
            }
            gens.push(name.clone());
            renamed.push(name);
        }
        let shift = self.generators.len() as i64;
        let mut rels = self.relators.clone();
        for r in &other.relators {
            rels.push(r.iter().map(|x| x.signum() * (x.abs() + shift)).collect());
        }
        (GroupPresentation { generators: gens, relators: rels }, renamed)
    }

    /// Quotient by the normal closure of `words`, then simplify.
    pub fn quotient(&self, words: &[Word]) -> GroupPresentation {
        let mut g = self.clone();
        g.relators.extend(words.iter().cloned());
        g.simplify(64)
    }

    /// Bounded Tietze simplification: reduce and deduplicate relators, then
    /// eliminate generators that occur exactly once in some relator.
    pub fn simplify(&self, max_passes: usize) -> GroupPresentation {
        let mut gens = self.generators.clone();
        let mut rels: Vec<Word> = self.relators.clone();
        for _ in 0..max_passes {
            let mut seen = BTreeSet::new();
            rels = rels
                .iter()
                .map(|r| canonical(r))
                .filter(|r| !r.is_empty() && seen.insert(r.clone()))
                .collect();
            rels.sort_by_key(|r| r.len());
            // find a relator in which some generator occurs exactly once
            let mut elim: Option<(usize, i64)> = None;
            'outer: for (ri, r) in rels.iter().enumerate() {
                for &x in r {
                    if r.iter().filter(|y| y.abs() == x.abs()).count() == 1 {
                        elim = Some((ri, x));
                        break 'outer;
                    }
                }
            }
            let Some((ri, x)) = elim else { break };
            let r = rels.remove(ri);
            let k = r.iter().position(|y| *y == x).unwrap();
            // r = u x v = 1  =>  x = u^-1 v^-1
            let u = &r[..k];
            let v = &r[k + 1..];
            let mut value = inverse(u);
            value.extend(inverse(v));
            let value = if x > 0 { free_reduce(&value) } else { inverse(&free_reduce(&value)) };
            let gen = x.abs();
            rels = rels
                .iter()
                .map(|w| {
                    let mut out = Vec::new();
                    for &y in w {
                        if y.abs() == gen {
                            if y > 0 {
                                out.extend(value.iter().copied());
                            } else {
                                out.extend(inverse(&value));
                            }
                        } else {
                            out.push(y);
                        }
                    }
                    free_reduce(&out)
                })
                .collect();
            // drop the generator and renumber
            gens.remove((gen - 1) as usize);
            rels = rels
                .iter()
                .map(|w| w.iter().map(|y| if y.abs() > gen { y.signum() * (y.abs() - 1) } else { *y }).collect())
                .collect();
        }
        let mut seen = BTreeSet::new();
        rels = rels.iter().map(|r| canonical(r)).filter(|r| !r.is_empty() && seen.insert(r.clone())).collect();
        rels.sort_by_key(|r| r.len());
        GroupPresentation { generators: gens, relators: rels }
    }

    /// Relator-by-generator exponent-sum matrix.
    pub fn exponent_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; self.generators.len()];
                for &x in r {
                    row[(x.abs() - 1) as usize] += x.signum();
                }
                row
            })
            .collect()
    }

    pub fn abelianization(&self) -> AbelianGroup {
        let m = self.exponent_matrix();
        let diag = smith_diagonal(&m, self.generators.len());
        let nonzero = diag.iter().filter(|x| **x != 0).count();
        AbelianGroup {
            rank: self.generators.len() - nonzero,
            torsion: diag.into_iter().filter(|x| *x > 1).map(|x| x as u64).collect(),
        }
    }
}

fn skip_ws(c: &[char], pos: &mut usize) {
    while *pos < c.len() && c[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_int(c: &[char], pos: &mut usize) -> Option<i64> {
    skip_ws(c, pos);
    let start = *pos;
    if *pos < c.len() && (c[*pos] == '-' || c[*pos] == '+') {
        *pos += 1;
    }
    while *pos < c.len() && c[*pos].is_ascii_digit() {
        *pos += 1;
    }
    let s: String = c[start..*pos].iter().collect();
    s.parse().ok()
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generators.is_empty() {
            return f.write_str("trivial");
        }
        let rels: Vec<String> = self.relators.iter().map(|r| self.format_word(r)).collect();
        write!(f, "< {} | {} >", self.generators.join(", "), rels.join(", "))
    }
}
