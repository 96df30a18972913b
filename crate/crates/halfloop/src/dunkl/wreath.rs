//! The wreath-product group `Z_n^L x| S_L` generated by the branch rotations
//! `Q_i` and the position transpositions `P_ij`.
//!
//! Elements are kept in the fixed normal form `Q_1^{a_1} ... Q_L^{a_L} P_pi`
//! (phases written to the left of the permutation). The group law follows
//! from `P_ij Q_j = Q_i P_ij` and `Q_i^n = 1`.

use crate::cyclotomic::CycNum;
use crate::polyrat::PosSubst;
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WreathElem {
    n: u32,
    /// phase exponents `a_i` in `0..n`, one per particle
    phases: Vec<u32>,
    /// permutation as images: particle `i+1` moves to `perm[i] + 1`
    perm: Vec<u32>,
}

impl WreathElem {
    pub fn identity(n: u32, l: usize) -> Self {
        WreathElem {
            n,
            phases: vec![0; l],
            perm: (0..l as u32).collect(),
        }
    }

    /// `Q_i^power` (i is 1-based; power may be negative).
    pub fn rotation(n: u32, l: usize, i: usize, power: i64) -> Self {
        let mut w = WreathElem::identity(n, l);
        w.phases[i - 1] = power.rem_euclid(n as i64) as u32;
        w
    }

    /// The transposition `P_ij` (1-based).
    pub fn transposition(n: u32, l: usize, i: usize, j: usize) -> Self {
        assert!(i != j && i >= 1 && j >= 1 && i <= l && j <= l);
        let mut w = WreathElem::identity(n, l);
        w.perm.swap(i - 1, j - 1);
        w
    }

    pub fn branch_count(&self) -> u32 {
        self.n
    }

    pub fn particle_count(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[u32] {
        &self.phases
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.phases.iter().all(|a| *a == 0)
            && self.perm.iter().enumerate().all(|(i, p)| *p == i as u32)
    }

    pub fn is_pure_phase(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, p)| *p == i as u32)
    }

    /// `pi(i)` with 1-based labels.
    pub fn image(&self, i: usize) -> usize {
        self.perm[i - 1] as usize + 1
    }

    fn inverse_perm(&self) -> Vec<u32> {
        let mut inv = vec![0; self.perm.len()];
        for (i, p) in self.perm.iter().enumerate() {
            inv[*p as usize] = i as u32;
        }
        inv
    }

    /// Group product in the phases-then-permutation normal form:
    /// `(a, pi)(b, rho) = (a + pi.b, pi rho)` with `(pi.b)_i = b_{pi^{-1}(i)}`.
    pub fn mul(&self, other: &WreathElem) -> WreathElem {
        assert_eq!(self.n, other.n);
        assert_eq!(self.phases.len(), other.phases.len());
        let inv = self.inverse_perm();
        let phases = (0..self.phases.len())
            .map(|i| (self.phases[i] + other.phases[inv[i] as usize]) % self.n)
            .collect();
        let perm = other
            .perm
            .iter()
            .map(|r| self.perm[*r as usize])
            .collect();
        WreathElem {
            n: self.n,
            phases,
            perm,
        }
    }

    pub fn inverse(&self) -> WreathElem {
        let inv = self.inverse_perm();
        let phases = (0..self.phases.len())
            .map(|i| (self.n - self.phases[self.perm[i] as usize] % self.n) % self.n)
            .collect();
        WreathElem {
            n: self.n,
            phases,
            perm: inv,
        }
    }

    /// Sign of the permutation part (`+1` even, `-1` odd).
    pub fn perm_sign(&self) -> i8 {
        let mut seen = vec![false; self.perm.len()];
        let mut sign = 1i8;
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.perm[cur] as usize;
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// The substitution realizing `w f(q) = (w.f)(q) w` under the algebra
    /// relations: `q_j -> tau^{-a_{pi(j)}} q_{pi(j)}`.
    pub fn position_action(&self, order: u32) -> PosSubst {
        let tau = CycNum::tau(order, self.n);
        let l = self.phases.len();
        let mut scale = Vec::with_capacity(l);
        let mut target = Vec::with_capacity(l);
        for j in 0..l {
            let pj = self.perm[j] as usize;
            scale.push(tau.pow(-(self.phases[pj] as i64)));
            target.push(pj as u32 + 1);
        }
        PosSubst { scale, target }
    }

    /// Phase picked up when the element moves past `p_j`:
    /// `w p_j = tau^{a_{pi(j)}} p_{pi(j)} w`.
    pub fn momentum_phase_exponent(&self, j: usize) -> u32 {
        self.phases[self.perm[j - 1] as usize]
    }
}

impl fmt::Display for WreathElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let mut wrote = false;
        for (i, a) in self.phases.iter().enumerate() {
            if *a != 0 {
                if wrote {
                    write!(f, "*")?;
                }
                wrote = true;
                if *a == 1 {
                    write!(f, "Q{}", i + 1)?;
                } else {
                    write!(f, "Q{}^{}", i + 1, a)?;
                }
            }
        }
        if !self.is_pure_phase() {
            if wrote {
                write!(f, "*")?;
            }
            write!(f, "P[")?;
            for (i, p) in self.perm.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", p + 1)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// All permutations of `{1..l}` as image vectors (deterministic order).
pub fn all_permutations(l: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut items: Vec<u32> = (0..l as u32).collect();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<u32>, k: usize, out: &mut Vec<Vec<u32>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Wreath element with an explicit permutation image vector.
pub fn from_perm(n: u32, perm: Vec<u32>) -> WreathElem {
    let l = perm.len();
    WreathElem {
        n,
        phases: vec![0; l],
        perm,
    }
}
