use crate::error::{Error, Result};

/// Occupation-number basis of `N` bosons in `d` modes, in descending
/// lexicographic order so the condensate `(N, 0, …, 0)` comes first.
#[derive(Clone, Debug)]
pub struct FockBasis {
    particles: usize,
    modes: usize,
    states: Vec<Vec<u8>>,
    /// `counts[p][s]`: number of ways to put `p` bosons into `s` modes.
    counts: Vec<Vec<usize>>,
}

/// `C(n, k)` as a float-free integer; `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).ok()
}

impl FockBasis {
    pub fn new(particles: usize, modes: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("need at least one mode".into()));
        }
        if particles > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("{particles} particles exceed the occupation range")));
        }
        let size = binomial(particles + modes - 1, particles)
            .ok_or_else(|| Error::Capacity("Fock dimension overflows".into()))?;
        if size > cap {
            return Err(Error::Capacity(format!("Fock dimension {size} exceeds the cap {cap}")));
        }
        let mut states = Vec::with_capacity(size);
        let mut current = vec![0u8; modes];
        fill(&mut states, &mut current, 0, particles);
        let counts = (0..=particles)
            .map(|p| (0..=modes).map(|s| if s == 0 { usize::from(p == 0) } else { binomial(p + s - 1, p).unwrap_or(0) }).collect())
            .collect();
        Ok(Self { particles, modes, states, counts })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &[u8] {
        &self.states[index]
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    /// Position of `occupation` in the enumeration, by counting the states
    /// that precede it.
    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        if occupation.len() != self.modes || occupation.iter().map(|&n| n as usize).sum::<usize>() != self.particles {
            return None;
        }
        Some(self.rank(occupation))
    }

    /// `index_of` without validation, for occupations known to be in the sector.
    pub(crate) fn rank(&self, occupation: &[u8]) -> usize {
        let mut remaining = self.particles;
        let mut index = 0;
        for (slot, &n) in occupation.iter().enumerate().take(self.modes - 1) {
            let rest = self.modes - slot - 1;
            for v in (n as usize + 1)..=remaining {
                index += self.counts[remaining - v][rest];
            }
            remaining -= n as usize;
        }
        index
    }
}

fn fill(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, slot: usize, remaining: usize) {
    if slot + 1 == current.len() {
        current[slot] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        current[slot] = n as u8;
        fill(out, current, slot + 1, remaining - n);
    }
    current[slot] = 0;
}
