//! Words in letters `a_1, a_2, ...` with nested powers.
//!
//! A word is written left to right as `f_r ... f_1`; when letters stand for
//! operators the rightmost factor acts first. Powers may nest, so words like
//! `((a2 a3 a2)^s a1 (a2 a3 a2)^s)^r` stay small even when their flattened
//! length does not fit in memory.

use std::fmt;

use crate::linalg::{matrix_power, sandwich_power, LinalgError, Matrix, Subspace, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Letter { letter: usize, exponent: u64 },
    Group { word: Word, exponent: u64 },
}

impl Factor {
    pub fn exponent(&self) -> u64 {
        match self {
            Factor::Letter { exponent, .. } | Factor::Group { exponent, .. } => *exponent,
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            Factor::Letter { exponent, .. } => *exponent as u128,
            Factor::Group { word, exponent } => word.len().saturating_mul(*exponent as u128),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Word {
    factors: Vec<Factor>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn letter(letter: usize) -> Self {
        Word::letter_pow(letter, 1)
    }

    pub fn letter_pow(letter: usize, exponent: u64) -> Self {
        Word {
            factors: vec![Factor::Letter { letter, exponent }],
        }
    }

    pub fn from_factor(f: Factor) -> Self {
        let mut w = Word::empty();
        w.push(f);
        w
    }

    /// Letters as written, left to right.
    pub fn from_letters(letters: &[usize]) -> Self {
        let mut w = Word::empty();
        for &l in letters {
            w.push(Factor::Letter { letter: l, exponent: 1 });
        }
        w
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Appends a factor on the right, merging equal adjacent letters.
    pub fn push(&mut self, f: Factor) {
        if f.exponent() == 0 {
            return;
        }
        if let (Some(Factor::Letter { letter: a, exponent: ea }), Factor::Letter { letter: b, exponent: eb }) =
            (self.factors.last_mut(), &f)
        {
            if *a == *b {
                *ea += *eb;
                return;
            }
        }
        self.factors.push(f);
    }

    /// `self` followed on the right by `other`.
    pub fn concat(mut self, other: Word) -> Word {
        for f in other.factors {
            self.push(f);
        }
        self
    }

    pub fn pow(self, exponent: u64) -> Word {
        if exponent == 1 {
            return self;
        }
        if let [Factor::Letter { letter, exponent: e }] = self.factors.as_slice() {
            return Word::letter_pow(*letter, e * exponent);
        }
        let mut w = Word::empty();
        w.push(Factor::Group { word: self, exponent });
        w
    }

    /// Flattened length. Saturates at `u128::MAX`.
    pub fn len(&self) -> u128 {
        self.factors.iter().fold(0u128, |acc, f| acc.saturating_add(f.len()))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of occurrences of `letter` in the flattened word.
    pub fn letter_count(&self, letter: usize) -> u128 {
        self.factors.iter().fold(0u128, |acc, f| {
            let c = match f {
                Factor::Letter { letter: l, exponent } => {
                    if *l == letter {
                        *exponent as u128
                    } else {
                        0
                    }
                }
                Factor::Group { word, exponent } => word.letter_count(letter).saturating_mul(*exponent as u128),
            };
            acc.saturating_add(c)
        })
    }

    pub fn max_letter(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Letter { letter, .. } => *letter,
                Factor::Group { word, .. } => word.max_letter(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Replaces every letter `i` with the word `f(i)`.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Word) -> Word {
        let mut out = Word::empty();
        for fac in &self.factors {
            match fac {
                Factor::Letter { letter, exponent } => {
                    for g in f(*letter).pow(*exponent).factors {
                        out.push(g);
                    }
                }
                Factor::Group { word, exponent } => {
                    for g in word.substitute(f).pow(*exponent).factors {
                        out.push(g);
                    }
                }
            }
        }
        out
    }

    /// Letters in the order they act (rightmost first).
    pub fn letters(&self) -> Letters<'_> {
        Letters {
            stack: vec![Frame {
                factors: &self.factors,
                next: self.factors.len(),
                reps: 0,
            }],
        }
    }

    /// The letter acting at step `n` (1-based, in acting order).
    pub fn letter_at(&self, n: u128) -> Option<usize> {
        if n == 0 {
            return None;
        }
        let mut rem = n;
        for f in self.factors.iter().rev() {
            let l = f.len();
            if rem <= l {
                return match f {
                    Factor::Letter { letter, .. } => Some(*letter),
                    Factor::Group { word, .. } => {
                        let unit = word.len();
                        word.letter_at((rem - 1) % unit + 1)
                    }
                };
            }
            rem -= l;
        }
        None
    }

    fn check_letters(&self, available: usize) -> Result<(), LinalgError> {
        let m = self.max_letter();
        if m > available || self.min_letter() == Some(0) {
            return Err(LinalgError::UnknownLetter { letter: m, available });
        }
        Ok(())
    }

    fn min_letter(&self) -> Option<usize> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Letter { letter, .. } => Some(*letter),
                Factor::Group { word, .. } => word.min_letter(),
            })
            .min()
    }

    /// The product matrix with letter `i` standing for `ops[i-1]`.
    pub fn eval_matrix(&self, ops: &[Matrix]) -> Result<Matrix, LinalgError> {
        self.check_letters(ops.len())?;
        let n = ops.first().map(|m| m.nrows()).ok_or(LinalgError::Empty)?;
        Ok(self.eval_unchecked(ops, n))
    }

    fn eval_unchecked(&self, ops: &[Matrix], n: usize) -> Matrix {
        let mut acc = Matrix::identity(n, n);
        for f in &self.factors {
            let m = match f {
                Factor::Letter { letter, exponent } => matrix_power(&ops[letter - 1], *exponent),
                Factor::Group { word, exponent } => matrix_power(&word.eval_unchecked(ops, n), *exponent),
            };
            acc *= m;
        }
        acc
    }

    /// Applies the word to `x`, letter by letter where that is cheap and
    /// through matrix powers otherwise.
    pub fn apply(&self, ops: &[Matrix], x: &Vector) -> Result<Vector, LinalgError> {
        self.check_letters(ops.len())?;
        for m in ops {
            if m.ncols() != x.len() || m.nrows() != x.len() {
                return Err(LinalgError::DimensionMismatch {
                    expected: x.len(),
                    found: m.nrows(),
                });
            }
        }
        Ok(self.apply_unchecked(ops, x.clone()))
    }

    fn apply_unchecked(&self, ops: &[Matrix], mut x: Vector) -> Vector {
        const DIRECT: u128 = 256;
        for f in self.factors.iter().rev() {
            match f {
                Factor::Letter { letter, exponent } => {
                    let a = &ops[letter - 1];
                    if (*exponent as u128) <= DIRECT {
                        for _ in 0..*exponent {
                            x = a * x;
                        }
                    } else {
                        x = matrix_power(a, *exponent) * x;
                    }
                }
                Factor::Group { word, exponent } => {
                    if f.len() <= DIRECT {
                        for _ in 0..*exponent {
                            x = word.apply_unchecked(ops, x);
                        }
                    } else {
                        let n = x.len();
                        x = matrix_power(&word.eval_unchecked(ops, n), *exponent) * x;
                    }
                }
            }
        }
        x
    }
}


/// Evaluation when every letter stands for an orthogonal projection.
/// Letter powers collapse by idempotence and groups `(p q p)^e` go through
/// [`sandwich_power`], which stays accurate for very large `e`.
impl Word {
    /// `(p, q)` when the word is exactly `a_p a_q a_p` with `p != q`.
    fn as_sandwich(&self) -> Option<(usize, usize)> {
        match self.factors.as_slice() {
            [Factor::Letter { letter: p, exponent: 1 }, Factor::Letter { letter: q, exponent: 1 }, Factor::Letter { letter: p2, exponent: 1 }]
                if p == p2 && p != q =>
            {
                Some((*p, *q))
            }
            _ => None,
        }
    }

    fn check_spaces(&self, spaces: &[Subspace], n: usize) -> Result<(), LinalgError> {
        self.check_letters(spaces.len())?;
        for s in spaces {
            if s.ambient_dim() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: s.ambient_dim(),
                });
            }
        }
        Ok(())
    }

    pub fn eval_projections(&self, spaces: &[Subspace]) -> Result<Matrix, LinalgError> {
        let n = spaces.first().map(|s| s.ambient_dim()).ok_or(LinalgError::Empty)?;
        self.check_spaces(spaces, n)?;
        let projs: Vec<Matrix> = spaces.iter().map(|s| s.projector()).collect();
        Ok(self.eval_proj_unchecked(spaces, &projs, n))
    }

    fn eval_proj_unchecked(&self, spaces: &[Subspace], projs: &[Matrix], n: usize) -> Matrix {
        let mut acc = Matrix::identity(n, n);
        for f in &self.factors {
            let m = match f {
                Factor::Letter { letter, .. } => projs[letter - 1].clone(),
                Factor::Group { word, exponent } => match word.as_sandwich() {
                    Some((p, q)) => sandwich_power(&spaces[p - 1], &spaces[q - 1], *exponent)
                        .expect("ambient dimensions checked"),
                    None => matrix_power(&word.eval_proj_unchecked(spaces, projs, n), *exponent),
                },
            };
            acc *= m;
        }
        acc
    }

    pub fn apply_projections(&self, spaces: &[Subspace], x: &Vector) -> Result<Vector, LinalgError> {
        self.check_spaces(spaces, x.len())?;
        let projs: Vec<Matrix> = spaces.iter().map(|s| s.projector()).collect();
        Ok(self.apply_proj_unchecked(spaces, &projs, x.clone()))
    }

    fn apply_proj_unchecked(&self, spaces: &[Subspace], projs: &[Matrix], mut x: Vector) -> Vector {
        const DIRECT: u128 = 256;
        for f in self.factors.iter().rev() {
            match f {
                Factor::Letter { letter, .. } => x = spaces[letter - 1].project_unchecked(&x),
                Factor::Group { word, exponent } => {
                    if let Some((p, q)) = word.as_sandwich() {
                        x = sandwich_power(&spaces[p - 1], &spaces[q - 1], *exponent).expect("ambient dimensions checked")
                            * x;
                    } else if f.len() <= DIRECT {
                        for _ in 0..*exponent {
                            x = word.apply_proj_unchecked(spaces, projs, x);
                        }
                    } else {
                        let m = word.eval_proj_unchecked(spaces, projs, x.len());
                        x = matrix_power(&m, *exponent) * x;
                    }
                }
            }
        }
        x
    }
}

struct Frame<'a> {
    factors: &'a [Factor],
    next: usize,
    reps: u64,
}

pub struct Letters<'a> {
    stack: Vec<Frame<'a>>,
}

impl Iterator for Letters<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            let top = self.stack.last_mut()?;
            if top.reps == 0 {
                if top.next == 0 {
                    self.stack.pop();
                    continue;
                }
                top.next -= 1;
                top.reps = top.factors[top.next].exponent();
                continue;
            }
            top.reps -= 1;
            match &top.factors[top.next] {
                Factor::Letter { letter, .. } => return Some(*letter),
                Factor::Group { word, .. } => {
                    let frame = Frame {
                        factors: &word.factors,
                        next: word.factors.len(),
                        reps: 0,
                    };
                    self.stack.push(frame);
                }
            }
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match fac {
                Factor::Letter { letter, exponent } => {
                    write!(f, "a{letter}")?;
                    if *exponent != 1 {
                        write!(f, "^{exponent}")?;
                    }
                }
                Factor::Group { word, exponent } => write!(f, "({word})^{exponent}")?,
            }
        }
        Ok(())
    }
}
