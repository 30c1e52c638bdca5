//! Index schedules `(j_n)` driving the iteration.

use std::path::Path;

use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule exhausted after {len} steps")]
    Exhausted { len: u128 },
    #[error("step numbers start at 1")]
    ZeroStep,
    #[error("index {index} outside 1..={alphabet}")]
    IndexOutOfRange { index: usize, alphabet: usize },
    #[error("periodic pattern must be non-empty")]
    EmptyPattern,
    #[error("ruler schedules need J >= 2, got {0}")]
    RulerTooSmall(usize),
    #[error("quasiperiodicity is undefined for finite sequences")]
    FiniteSequence,
    #[error("bad schedule spec '{spec}': {reason}")]
    Parse { spec: String, reason: String },
}

pub type Result<T> = std::result::Result<T, ScheduleError>;

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Periodic(Vec<usize>),
    Explicit(Vec<usize>),
    /// Capped ruler: position n gets `trailing_zeros(n) + 1`, at most J.
    Ruler,
    /// A finite word, flattened in acting order.
    Constructed(Word),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: Kind,
    alphabet: usize,
}

fn check_indices(seq: &[usize], alphabet: usize) -> Result<()> {
    match seq.iter().find(|&&i| i == 0 || i > alphabet) {
        Some(&index) => Err(ScheduleError::IndexOutOfRange { index, alphabet }),
        None => Ok(()),
    }
}

impl Schedule {
    pub fn periodic(pattern: Vec<usize>, alphabet: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(ScheduleError::EmptyPattern);
        }
        check_indices(&pattern, alphabet)?;
        Ok(Schedule {
            kind: Kind::Periodic(pattern),
            alphabet,
        })
    }

    pub fn explicit(sequence: Vec<usize>, alphabet: usize) -> Result<Self> {
        check_indices(&sequence, alphabet)?;
        Ok(Schedule {
            kind: Kind::Explicit(sequence),
            alphabet,
        })
    }

    pub fn ruler(j: usize) -> Result<Self> {
        if j < 2 {
            return Err(ScheduleError::RulerTooSmall(j));
        }
        Ok(Schedule {
            kind: Kind::Ruler,
            alphabet: j,
        })
    }

    pub fn constructed(word: Word, alphabet: usize) -> Result<Self> {
        let m = word.max_letter();
        if m > alphabet {
            return Err(ScheduleError::IndexOutOfRange { index: m, alphabet });
        }
        Ok(Schedule {
            kind: Kind::Constructed(word),
            alphabet,
        })
    }

    /// Parses `periodic:1,2,3`, `ruler:J` or `file:PATH`. Periodic and file
    /// schedules take the largest index as their alphabet size.
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |reason: &str| ScheduleError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = spec.split_once(':').ok_or_else(|| err("expected KIND:ARGS"))?;
        match kind {
            "periodic" => {
                let pattern = parse_indices(rest).map_err(|r| err(&r))?;
                let j = pattern.iter().copied().max().unwrap_or(0);
                Schedule::periodic(pattern, j)
            }
            "ruler" => {
                let j: usize = rest.trim().parse().map_err(|_| err("J must be an integer"))?;
                Schedule::ruler(j)
            }
            "file" => {
                let text = std::fs::read_to_string(Path::new(rest)).map_err(|e| err(&e.to_string()))?;
                let seq = parse_indices(&text).map_err(|r| err(&r))?;
                let j = seq.iter().copied().max().unwrap_or(0);
                Schedule::explicit(seq, j)
            }
            _ => Err(err("unknown kind")),
        }
    }

    /// Same sequence over a larger alphabet.
    pub fn with_alphabet(mut self, alphabet: usize) -> Result<Self> {
        let used = match &self.kind {
            Kind::Periodic(p) | Kind::Explicit(p) => p.iter().copied().max().unwrap_or(0),
            Kind::Ruler => self.alphabet,
            Kind::Constructed(w) => w.max_letter(),
        };
        if used > alphabet || (matches!(self.kind, Kind::Ruler) && alphabet != self.alphabet) {
            return Err(ScheduleError::IndexOutOfRange { index: used, alphabet });
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Number of steps, or `None` for infinite schedules.
    pub fn len(&self) -> Option<u128> {
        match &self.kind {
            Kind::Periodic(_) | Kind::Ruler => None,
            Kind::Explicit(s) => Some(s.len() as u128),
            Kind::Constructed(w) => Some(w.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The index used at step `n` (1-based).
    pub fn emit(&self, n: u128) -> Result<usize> {
        if n == 0 {
            return Err(ScheduleError::ZeroStep);
        }
        match &self.kind {
            Kind::Periodic(p) => Ok(p[((n - 1) % p.len() as u128) as usize]),
            Kind::Ruler => Ok((n.trailing_zeros() as usize + 1).min(self.alphabet)),
            Kind::Explicit(s) => s
                .get((n - 1) as usize)
                .copied()
                .ok_or(ScheduleError::Exhausted { len: s.len() as u128 }),
            Kind::Constructed(w) => w.letter_at(n).ok_or(ScheduleError::Exhausted { len: w.len() }),
        }
    }

    /// Iterator over the indices in order; stops at the end of finite schedules.
    pub fn iter(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.kind {
            Kind::Periodic(p) => Box::new(p.iter().copied().cycle()),
            Kind::Explicit(s) => Box::new(s.iter().copied()),
            Kind::Ruler => {
                let j = self.alphabet;
                Box::new((1u128..).map(move |n| (n.trailing_zeros() as usize + 1).min(j)))
            }
            Kind::Constructed(w) => Box::new(w.letters()),
        }
    }

    /// `sup_n (k_n(i) - k_{n-1}(i))` with `k_0 = 0`, where `k_n(i)` is the
    /// position of the n-th occurrence of `i`. Infinite when `i` never occurs.
    pub fn quasiperiod_index(&self, i: usize) -> Result<f64> {
        if i == 0 || i > self.alphabet {
            return Err(ScheduleError::IndexOutOfRange {
                index: i,
                alphabet: self.alphabet,
            });
        }
        let period: Vec<usize> = match &self.kind {
            Kind::Periodic(p) => p.clone(),
            Kind::Ruler => {
                let len = 1usize << (self.alphabet - 1);
                (1..=len as u128).map(|n| self.emit(n).unwrap()).collect()
            }
            Kind::Explicit(_) | Kind::Constructed(_) => return Err(ScheduleError::FiniteSequence),
        };
        let mut last = 0usize;
        let mut gap = 0usize;
        let mut seen = false;
        for (pos, &j) in period.iter().chain(period.iter()).enumerate() {
            if j == i {
                gap = gap.max(pos + 1 - last);
                last = pos + 1;
                seen = true;
            }
        }
        Ok(if seen { gap as f64 } else { f64::INFINITY })
    }

    pub fn quasiperiod_bound(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for i in 1..=self.alphabet {
            best = best.max(self.quasiperiod_index(i)?);
        }
        Ok(best)
    }
}

fn parse_indices(text: &str) -> std::result::Result<Vec<usize>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("'{t}' is not an index")))
        .collect()
}
