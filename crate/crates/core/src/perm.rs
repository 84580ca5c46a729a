//! Permutations of {1..n} in cycle notation, and words in named generators.
//!
//! Composition is "rightmost acts first": `a.compose(b)` maps x to a(b(x)).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Parses `()`, `e`, or products of cycles such as `(12)(34)` or `(1,2,3)`.
    /// Points are 1-based; without commas each digit is one point.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let t = text.trim();
        let mut p = Perm::identity(n);
        if t.is_empty() || t == "e" || t == "()" {
            return Ok(p);
        }
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::parse(text, "expected `(`"))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::parse(text, "missing `)`"))?;
            let body = &open[..close];
            rest = open[close + 1..].trim_start();
            let points: Vec<usize> = if body.contains(',') {
                body.split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| Error::parse(text, "bad point")))
                    .collect::<Result<_>>()?
            } else {
                body.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as usize)
                            .ok_or_else(|| Error::parse(text, "bad point"))
                    })
                    .collect::<Result<_>>()?
            };
            if points.iter().any(|&x| x == 0 || x > n) {
                return Err(Error::parse(text, format!("points must lie in 1..={n}")));
            }
            if points.iter().collect::<BTreeSet<_>>().len() != points.len() {
                return Err(Error::parse(text, "repeated point in a cycle"));
            }
            let mut cycle = Perm::identity(n);
            for (k, &x) in points.iter().enumerate() {
                cycle.0[x - 1] = points[(k + 1) % points.len()] - 1;
            }
            p = p.compose(&cycle);
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Perm(inv)
    }

    pub fn pow(&self, e: u32) -> Perm {
        (0..e).fold(Perm::identity(self.degree()), |acc, _| acc.compose(self))
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Cycle lengths in decreasing order, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    pub fn order(&self) -> usize {
        self.cycle_type()
            .into_iter()
            .fold(1, num_integer::lcm)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut any = false;
        for s in 0..n {
            if seen[s] || self.0[s] == s {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut x = s;
            let sep = if n > 9 { "," } else { "" };
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, "{sep}")?;
                }
                first = false;
                write!(f, "{}", x + 1)?;
                x = self.0[x];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{self}")
    }
}

/// Evaluates a word such as `r^3s`, `(rs)^2` or `e` in single-letter generators.
pub fn eval_word(word: &str, gens: &BTreeMap<String, Perm>, n: usize) -> Result<Perm> {
    let chars: Vec<char> = word.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() || chars == ['e'] || chars == ['1'] {
        return Ok(Perm::identity(n));
    }
    let mut pos = 0;
    let p = word_product(&chars, &mut pos, gens, n, word)?;
    if pos != chars.len() {
        return Err(Error::parse(word, "unbalanced `)`"));
    }
    Ok(p)
}

fn word_product(
    chars: &[char],
    pos: &mut usize,
    gens: &BTreeMap<String, Perm>,
    n: usize,
    word: &str,
) -> Result<Perm> {
    let mut acc = Perm::identity(n);
    while *pos < chars.len() && chars[*pos] != ')' {
        let c = chars[*pos];
        *pos += 1;
        let base = if c == '(' {
            let inner = word_product(chars, pos, gens, n, word)?;
            if chars.get(*pos) != Some(&')') {
                return Err(Error::parse(word, "missing `)`"));
            }
            *pos += 1;
            inner
        } else {
            gens.get(&c.to_string())
                .cloned()
                .ok_or_else(|| Error::parse(word, format!("unknown generator `{c}`")))?
        };
        let mut e = 1;
        if chars.get(*pos) == Some(&'^') {
            *pos += 1;
            let start = *pos;
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let digits: String = chars[start..*pos].iter().collect();
            e = digits
                .parse()
                .map_err(|_| Error::parse(word, "expected exponent after `^`"))?;
        }
        acc = acc.compose(&base.pow(e));
    }
    Ok(acc)
}

/// All elements of the group generated by `gens`, breadth-first from the identity.
pub fn closure(gens: &[Perm], n: usize) -> Vec<Perm> {
    let id = Perm::identity(n);
    let mut seen = BTreeSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = g.compose(s);
            if seen.insert(h.clone()) {
                order.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    order
}
