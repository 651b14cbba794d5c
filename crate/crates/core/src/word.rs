//! Words of a finitely generated abelian group, written as multi-exponents.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of words a single enumeration may produce.
pub const MAX_WORDS: usize = 100_000;

/// `g_1^{k_1} ∘ … ∘ g_m^{k_m}`; commutativity makes any word reducible to this form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn identity(m: usize) -> Word {
        Word(vec![0; m])
    }

    pub fn generator(m: usize, i: usize, power: i32) -> Word {
        let mut k = vec![0; m];
        k[i] = power;
        Word(k)
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ |k_i|`.
    pub fn length(&self) -> u32 {
        self.0.iter().map(|k| k.unsigned_abs()).sum()
    }

    /// `max |k_i|`.
    pub fn budget(&self) -> u32 {
        self.0.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// The word of the composite `self ∘ other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().map(|k| -k).collect())
    }

    /// Tag used in CSV exports, e.g. `2;-1`.
    pub fn tag(&self) -> String {
        self.0.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.tag().replace(';', ","))
    }
}

pub fn word_count(m: usize, budget: u32) -> usize {
    let side = 2 * budget as usize + 1;
    (0..m).fold(1usize, |acc, _| acc.saturating_mul(side))
}

/// All words with `|k_i| ≤ budget`, ordered by `Σ|k_i|` and then
/// lexicographically.
pub fn enumerate_words(m: usize, budget: u32) -> Result<Vec<Word>> {
    let count = word_count(m, budget);
    if count > MAX_WORDS {
        return Err(Error::BudgetExceeded {
            words: count,
            limit: MAX_WORDS,
        });
    }
    let b = budget as i32;
    let mut words = Vec::with_capacity(count);
    let mut cur = vec![-b; m];
    loop {
        words.push(Word(cur.clone()));
        let mut i = m;
        loop {
            if i == 0 {
                words.sort_by(|x, y| x.length().cmp(&y.length()).then_with(|| x.cmp(y)));
                return Ok(words);
            }
            i -= 1;
            if cur[i] < b {
                cur[i] += 1;
                break;
            }
            cur[i] = -b;
        }
    }
}
