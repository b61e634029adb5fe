use super::spec::{CircuitSpec, ModulationSpec, PAIRS};
use crate::numkit::{ComplexMat, C64};

/// Product Fock space of four truncated transmons.
///
/// Index of `|n₁ n₂ n₃ n₄⟩` is `((n₁·d + n₂)·d + n₃)·d + n₄`: qubit 1 is the
/// most significant digit, so `|0001⟩` (qubit 4 excited) has index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub levels: usize,
}

impl FockSpace {
    pub fn new(levels: usize) -> Self {
        Self { levels }
    }

    pub fn dim(&self) -> usize {
        self.levels.pow(4)
    }

    pub fn index(&self, occupation: [usize; 4]) -> usize {
        occupation.iter().fold(0, |acc, &n| acc * self.levels + n)
    }

    pub fn occupation(&self, mut index: usize) -> [usize; 4] {
        let mut n = [0; 4];
        for k in (0..4).rev() {
            n[k] = index % self.levels;
            index /= self.levels;
        }
        n
    }

    /// Indices of `(|0001⟩, |0010⟩, |0100⟩, |1000⟩)`.
    pub fn single_excitations(&self) -> [usize; 4] {
        [3, 2, 1, 0].map(|k| {
            let mut n = [0; 4];
            n[k] = 1;
            self.index(n)
        })
    }

    /// Position of qubit `k`'s single excitation in [`single_excitations`](Self::single_excitations).
    pub fn single_excitation_slot(k: usize) -> usize {
        3 - k
    }

    /// Non-zero entries `(row, col, value)` of `a_k† a_l`.
    pub fn hop(&self, k: usize, l: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for col in 0..self.dim() {
            let mut n = self.occupation(col);
            if n[l] == 0 {
                continue;
            }
            let mut amp = (n[l] as f64).sqrt();
            n[l] -= 1;
            if n[k] + 1 >= self.levels {
                continue;
            }
            amp *= ((n[k] + 1) as f64).sqrt();
            n[k] += 1;
            out.push((self.index(n), col, amp));
        }
        out
    }

    /// Non-zero entries of `(a_k + a_k†)(a_l + a_l†)` for `k ≠ l`.
    pub fn dipole(&self, k: usize, l: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for col in 0..self.dim() {
            let n = self.occupation(col);
            for dk in [-1i64, 1] {
                for dl in [-1i64, 1] {
                    let (nk, nl) = (n[k] as i64 + dk, n[l] as i64 + dl);
                    if nk < 0 || nl < 0 || nk >= self.levels as i64 || nl >= self.levels as i64 {
                        continue;
                    }
                    let ak = (n[k].max(nk as usize) as f64).sqrt();
                    let al = (n[l].max(nl as usize) as f64).sqrt();
                    let mut m = n;
                    m[k] = nk as usize;
                    m[l] = nl as usize;
                    out.push((self.index(m), col, ak * al));
                }
            }
        }
        out
    }
}

fn diagonal_part(space: &FockSpace, cs: &CircuitSpec, freqs: [f64; 4]) -> ComplexMat {
    let diag: Vec<f64> = (0..space.dim())
        .map(|i| {
            let n = space.occupation(i);
            (0..4)
                .map(|k| {
                    let nk = n[k] as f64;
                    freqs[k] * nk + 0.5 * cs.alpha[k] * nk * (nk - 1.0)
                })
                .sum()
        })
        .collect();
    ComplexMat::from_diag(&diag)
}

/// Lab-frame `H_s(t) = Σ ω_k(t) n_k + (α_k/2) n_k(n_k − 1) + Σ J_kl (a_k + a_k†)(a_l + a_l†)`.
pub fn circuit_hamiltonian(cs: &CircuitSpec, ms: &ModulationSpec, t: f64) -> ComplexMat {
    let space = FockSpace::new(cs.levels);
    let freqs = [0, 1, 2, 3].map(|k| ms.mean(cs, k) + ms.offset(k, t));
    let mut h = diagonal_part(&space, cs, freqs);
    for (p, &(k, l)) in PAIRS.iter().enumerate() {
        let j = cs.coupling[p];
        if j == 0.0 {
            continue;
        }
        for (r, c, v) in space.dipole(k, l) {
            h[(r, c)] += C64::new(j * v, 0.0);
        }
    }
    h
}

/// Generator in the frame rotating at each mean frequency `ω̄_k`.
///
/// The modulation stays exactly on the diagonal. Couplings keep only the
/// excitation-conserving terms `J (a_k† a_l e^{i(ω̄_k − ω̄_l)t} + h.c.)`;
/// the dropped `a a` and `a† a†` terms rotate at `ω̄_k + ω̄_l`.
/// `(J, ω̄_k − ω̄_l, hop entries)` for one coupled pair.
type Hop = (f64, f64, Vec<(usize, usize, f64)>);

#[derive(Debug, Clone)]
pub struct RotatingFrame {
    pub space: FockSpace,
    static_diag: ComplexMat,
    numbers: Vec<[f64; 4]>,
    hops: Vec<Hop>,
    ms: ModulationSpec,
}

impl RotatingFrame {
    pub fn new(cs: &CircuitSpec, ms: &ModulationSpec) -> Self {
        let space = FockSpace::new(cs.levels);
        let static_diag = diagonal_part(&space, cs, [0.0; 4]);
        let numbers = (0..space.dim()).map(|i| space.occupation(i).map(|n| n as f64)).collect();
        let means = ms.means(cs);
        let hops = PAIRS
            .iter()
            .enumerate()
            .filter(|(p, _)| cs.coupling[*p] != 0.0)
            .map(|(p, &(k, l))| (cs.coupling[p], means[k] - means[l], space.hop(k, l)))
            .collect();
        Self { space, static_diag, numbers, hops, ms: ms.clone() }
    }

    pub fn at(&self, t: f64) -> ComplexMat {
        let mut h = self.static_diag.clone();
        let offsets = [0, 1, 2, 3].map(|k| self.ms.offset(k, t));
        for (i, n) in self.numbers.iter().enumerate() {
            h[(i, i)] += C64::new((0..4).map(|k| offsets[k] * n[k]).sum::<f64>(), 0.0);
        }
        for (j, detuning, entries) in &self.hops {
            let phase = C64::from_polar(*j, detuning * t);
            for &(r, c, v) in entries {
                h[(r, c)] += phase * v;
                h[(c, r)] += phase.conj() * v;
            }
        }
        h
    }

    /// Largest angular frequency present, rad/µs.
    pub fn frequency_scale(&self) -> f64 {
        let modulation: f64 = self
            .ms
            .qubits
            .iter()
            .flat_map(|q| q.tones.iter().map(|t| t.amplitude.abs() + t.freq.abs()))
            .fold(0.0, f64::max);
        let detuning = self.hops.iter().map(|(j, d, _)| d.abs() + 2.0 * j.abs()).fold(0.0, f64::max);
        let anharmonic = self.static_diag.max_abs();
        modulation + detuning.max(anharmonic)
    }
}

/// Projection onto `(|0001⟩, |0010⟩, |0100⟩, |1000⟩)`.
pub fn single_excitation_block(h: &ComplexMat, cs: &CircuitSpec) -> ComplexMat {
    let idx = FockSpace::new(cs.levels).single_excitations();
    h.select(&idx, &idx)
}
