//! Coxeter systems (W, S): matrix validation, exact group enumeration, word arithmetic.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Default ceiling on the number of group elements enumerated by [`build_group`].
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// Index of a generator in the ordered set S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(pub u16);

impl Gen {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Element of W identified by its ShortLex rank: id 0 is the identity and ids
/// sort by (length, lexicographic canonical word).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub u32);

impl Elem {
    pub const IDENTITY: Elem = Elem(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoxeterError {
    InvalidMatrix {
        row: usize,
        col: usize,
        reason: &'static str,
    },
    RankZero,
    /// An m entry inside the requested generator set is infinite.
    InfiniteBond { s: Gen, t: Gen },
    /// Enumeration exceeded the element cap before closing.
    GroupTooLarge { cap: usize },
}

impl fmt::Display for CoxeterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoxeterError::InvalidMatrix { row, col, reason } => {
                write!(f, "invalid Coxeter matrix at ({row},{col}): {reason}")
            }
            CoxeterError::RankZero => write!(f, "rank-0 Coxeter matrix rejected"),
            CoxeterError::InfiniteBond { s, t } => {
                write!(f, "infinite bond between {s} and {t}")
            }
            CoxeterError::GroupTooLarge { cap } => {
                write!(f, "group enumeration exceeded cap {cap}")
            }
        }
    }
}

impl core::error::Error for CoxeterError {}

/// Symmetric Coxeter matrix; the entry 0 encodes an infinite bond.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoxeterMatrix {
    rank: usize,
    entries: Vec<u32>,
}

impl CoxeterMatrix {
    /// Validates m_ss = 1, m_st = m_ts, and m_st in {0, 2, 3, ...} off the diagonal.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self, CoxeterError> {
        let rank = rows.len();
        if rank == 0 {
            return Err(CoxeterError::RankZero);
        }
        // Support masks are u32 bitsets.
        if rank > 32 {
            return Err(CoxeterError::InvalidMatrix {
                row: 0,
                col: 0,
                reason: "rank above 32 unsupported",
            });
        }
        let mut entries = vec![0u32; rank * rank];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != rank {
                return Err(CoxeterError::InvalidMatrix {
                    row: i,
                    col: row.len(),
                    reason: "not square",
                });
            }
            for (j, &m) in row.iter().enumerate() {
                if i == j && m != 1 {
                    return Err(CoxeterError::InvalidMatrix {
                        row: i,
                        col: j,
                        reason: "diagonal entry must be 1",
                    });
                }
                if i != j && m == 1 {
                    return Err(CoxeterError::InvalidMatrix {
                        row: i,
                        col: j,
                        reason: "off-diagonal entry must be 0 or >= 2",
                    });
                }
                entries[i * rank + j] = m;
            }
        }
        for i in 0..rank {
            for j in (i + 1)..rank {
                if entries[i * rank + j] != entries[j * rank + i] {
                    return Err(CoxeterError::InvalidMatrix {
                        row: i,
                        col: j,
                        reason: "not symmetric",
                    });
                }
            }
        }
        Ok(CoxeterMatrix { rank, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Raw entry; 0 encodes infinity.
    #[inline]
    pub fn entry(&self, s: Gen, t: Gen) -> u32 {
        self.entries[s.index() * self.rank + t.index()]
    }

    /// Finite bond order, or None for an infinite bond.
    pub fn bond(&self, s: Gen, t: Gen) -> Option<u32> {
        match self.entry(s, t) {
            0 => None,
            m => Some(m),
        }
    }

    /// True when every bond is finite.
    pub fn is_two_spherical(&self) -> bool {
        self.entries.iter().all(|&m| m != 0)
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> {
        (0..self.rank as u16).map(Gen)
    }

    /// Rows of the matrix, row-major, 0 encoding infinity.
    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.rank)
            .map(|i| self.entries[i * self.rank..(i + 1) * self.rank].to_vec())
            .collect()
    }

    /// Restriction of the matrix to a sorted, deduplicated generator set.
    pub fn submatrix(&self, j: &[Gen]) -> Result<Self, CoxeterError> {
        let mut j: Vec<Gen> = j.to_vec();
        j.sort_unstable();
        j.dedup();
        let rows = j
            .iter()
            .map(|&s| j.iter().map(|&t| self.entry(s, t)).collect())
            .collect();
        CoxeterMatrix::new(rows)
    }

    /// Whether the standard parabolic ⟨J⟩ is finite, decided by enumeration
    /// under `cap`. An infinite bond inside J short-circuits to false.
    pub fn spherical_check(&self, j: &[Gen], cap: usize) -> Result<bool, CoxeterError> {
        let mut j: Vec<Gen> = j.to_vec();
        j.sort_unstable();
        j.dedup();
        if j.is_empty() {
            return Ok(true);
        }
        for (a, &s) in j.iter().enumerate() {
            for &t in &j[a + 1..] {
                if self.entry(s, t) == 0 {
                    return Ok(false);
                }
            }
        }
        build_group(self.submatrix(&j)?, cap).map(|_| true)
    }
}

/// Fully enumerated finite Coxeter group with ShortLex element ids.
#[derive(Debug)]
pub struct CoxeterGroup {
    matrix: CoxeterMatrix,
    order: usize,
    /// order x rank, row-major: right[e * rank + g] = e * s_g.
    right: Vec<u32>,
    length: Vec<u32>,
    words: Vec<Vec<Gen>>,
    inverse: Vec<u32>,
    /// Bitmask of generators appearing in the canonical word.
    support: Vec<u32>,
}

/// Enumerates W by coset-table closure over the trivial subgroup: new elements
/// are defined for the least open (element, generator) slot, the pair relations
/// (st)^m are scanned to fill and merge entries, and the result is relabeled
/// into ShortLex order. Exact integer arithmetic throughout.
pub fn build_group(matrix: CoxeterMatrix, cap: usize) -> Result<CoxeterGroup, CoxeterError> {
    let rank = matrix.rank();
    for s in matrix.gens() {
        for t in matrix.gens() {
            if s < t && matrix.entry(s, t) == 0 {
                return Err(CoxeterError::InfiniteBond { s, t });
            }
        }
    }
    let mut relations: Vec<Vec<u16>> = Vec::new();
    for s in 0..rank as u16 {
        for t in (s + 1)..rank as u16 {
            let m = matrix.entry(Gen(s), Gen(t));
            let mut word = Vec::with_capacity(2 * m as usize);
            for _ in 0..m {
                word.push(s);
                word.push(t);
            }
            relations.push(word);
        }
    }

    let mut tc = Tables {
        rank,
        succ: vec![vec![None; rank]],
        parent: vec![0],
        live: 1,
        merges: VecDeque::new(),
        rescan: VecDeque::new(),
    };
    tc.rescan.push_back(0);
    loop {
        while !(tc.rescan.is_empty() && tc.merges.is_empty()) {
            tc.process_merges();
            if let Some(e) = tc.rescan.pop_front() {
                let e = tc.find(e);
                for r in &relations {
                    tc.scan(e, r);
                }
            }
        }
        let mut slot = None;
        'search: for x in 0..tc.parent.len() as u32 {
            if tc.find(x) != x {
                continue;
            }
            for g in 0..rank {
                if tc.succ[x as usize][g].is_none() {
                    slot = Some((x, g));
                    break 'search;
                }
            }
        }
        let Some((x, g)) = slot else { break };
        tc.live += 1;
        if tc.live > cap {
            return Err(CoxeterError::GroupTooLarge { cap });
        }
        let n = tc.parent.len() as u32;
        tc.parent.push(n);
        tc.succ.push(vec![None; rank]);
        tc.succ[x as usize][g] = Some(n);
        tc.succ[n as usize][g] = Some(x);
        tc.rescan.push_back(x);
        tc.rescan.push_back(n);
    }
    Ok(finish(matrix, tc))
}

struct Tables {
    rank: usize,
    succ: Vec<Vec<Option<u32>>>,
    parent: Vec<u32>,
    live: usize,
    merges: VecDeque<(u32, u32)>,
    rescan: VecDeque<u32>,
}

impl Tables {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Records x * s_g = y; generators are involutions so the edge is symmetric.
    fn deduce(&mut self, x: u32, g: usize, y: u32) {
        let x = self.find(x);
        let y = self.find(y);
        match self.succ[x as usize][g] {
            None => {
                self.succ[x as usize][g] = Some(y);
                self.rescan.push_back(x);
                match self.succ[y as usize][g] {
                    None => {
                        self.succ[y as usize][g] = Some(x);
                        self.rescan.push_back(y);
                    }
                    Some(z) => {
                        let z = self.find(z);
                        if z != x {
                            self.merges.push_back((z, x));
                        }
                    }
                }
            }
            Some(z) => {
                let z = self.find(z);
                if z != y {
                    self.merges.push_back((z, y));
                }
            }
        }
    }

    fn process_merges(&mut self) {
        while let Some((a, b)) = self.merges.pop_front() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.parent[drop as usize] = keep;
            self.live -= 1;
            for g in 0..self.rank {
                if let Some(z) = self.succ[drop as usize][g] {
                    self.deduce(keep, g, z);
                }
            }
            self.rescan.push_back(keep);
        }
    }

    /// Pushes the relation word through e from both ends; a one-slot gap is a
    /// forced edge, a closed mismatch is a coincidence.
    fn scan(&mut self, e: u32, word: &[u16]) {
        let e = self.find(e);
        let mut f = e;
        let mut i = 0;
        while i < word.len() {
            match self.succ[f as usize][word[i] as usize] {
                Some(n) => {
                    f = self.find(n);
                    i += 1;
                }
                None => break,
            }
        }
        if i == word.len() {
            if f != e {
                self.merges.push_back((f, e));
            }
            return;
        }
        let mut b = e;
        let mut j = word.len();
        while j > i + 1 {
            match self.succ[b as usize][word[j - 1] as usize] {
                Some(p) => {
                    b = self.find(p);
                    j -= 1;
                }
                None => break,
            }
        }
        if j == i + 1 {
            self.deduce(f, word[i] as usize, b);
        }
    }
}

/// Compacts the closed table and relabels elements in ShortLex order by BFS
/// from the identity with ascending generators; first discovery yields the
/// ShortLex-least reduced word.
fn finish(matrix: CoxeterMatrix, mut tc: Tables) -> CoxeterGroup {
    let rank = tc.rank;
    let total = tc.parent.len() as u32;
    let mut dense_of = vec![u32::MAX; total as usize];
    let mut roots = Vec::new();
    for x in 0..total {
        if tc.find(x) == x {
            dense_of[x as usize] = roots.len() as u32;
            roots.push(x);
        }
    }
    let n = roots.len();
    let mut succ = vec![0u32; n * rank];
    for (d, &x) in roots.iter().enumerate() {
        for g in 0..rank {
            let y = tc.succ[x as usize][g].expect("closed table");
            succ[d * rank + g] = dense_of[tc.find(y) as usize];
        }
    }

    let identity = dense_of[tc.find(0) as usize];
    let mut new_of = vec![u32::MAX; n];
    let mut order_of = Vec::with_capacity(n);
    let mut words: Vec<Vec<Gen>> = Vec::with_capacity(n);
    new_of[identity as usize] = 0;
    order_of.push(identity);
    words.push(Vec::new());
    let mut head = 0;
    while head < order_of.len() {
        let e = order_of[head];
        let prefix = words[head].clone();
        for g in 0..rank {
            let c = succ[e as usize * rank + g];
            if new_of[c as usize] == u32::MAX {
                new_of[c as usize] = order_of.len() as u32;
                order_of.push(c);
                let mut w = prefix.clone();
                w.push(Gen(g as u16));
                words.push(w);
            }
        }
        head += 1;
    }
    debug_assert_eq!(order_of.len(), n, "Cayley graph is connected");

    let mut right = vec![0u32; n * rank];
    for new in 0..n {
        let dense = order_of[new];
        for g in 0..rank {
            right[new * rank + g] = new_of[succ[dense as usize * rank + g] as usize];
        }
    }
    let length: Vec<u32> = words.iter().map(|w| w.len() as u32).collect();
    let support: Vec<u32> = words
        .iter()
        .map(|w| w.iter().fold(0u32, |m, g| m | (1 << g.0)))
        .collect();
    let mut inverse = vec![0u32; n];
    for e in 0..n {
        let mut acc = 0u32;
        for g in words[e].iter().rev() {
            acc = right[acc as usize * rank + g.index()];
        }
        inverse[e] = acc;
    }

    CoxeterGroup {
        matrix,
        order: n,
        right,
        length,
        words,
        inverse,
        support,
    }
}

impl CoxeterGroup {
    pub fn matrix(&self) -> &CoxeterMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        (0..self.order as u32).map(Elem)
    }

    #[inline]
    pub fn right_mul(&self, e: Elem, g: Gen) -> Elem {
        Elem(self.right[e.index() * self.matrix.rank + g.index()])
    }

    /// Folds the canonical word of b through the right-multiplication table.
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let mut acc = a;
        for &g in &self.words[b.index()] {
            acc = self.right_mul(acc, g);
        }
        acc
    }

    #[inline]
    pub fn inv(&self, e: Elem) -> Elem {
        Elem(self.inverse[e.index()])
    }

    #[inline]
    pub fn len(&self, e: Elem) -> u32 {
        self.length[e.index()]
    }

    /// ShortLex-least reduced word.
    pub fn word(&self, e: Elem) -> &[Gen] {
        &self.words[e.index()]
    }

    /// Bitmask of the generators occurring in any reduced word of e.
    #[inline]
    pub fn support_mask(&self, e: Elem) -> u32 {
        self.support[e.index()]
    }

    /// Product of an explicit letter sequence, evaluated from the identity.
    pub fn fold<I: IntoIterator<Item = Gen>>(&self, word: I) -> Elem {
        let mut acc = Elem::IDENTITY;
        for g in word {
            acc = self.right_mul(acc, g);
        }
        acc
    }

    #[inline]
    pub fn is_right_descent(&self, e: Elem, g: Gen) -> bool {
        self.len(self.right_mul(e, g)) < self.len(e)
    }

    pub fn gen_mask(&self, j: &[Gen]) -> u32 {
        j.iter().fold(0u32, |m, g| m | (1 << g.0))
    }

    /// Membership in the standard parabolic ⟨J⟩, by canonical-word support.
    #[inline]
    pub fn in_parabolic(&self, e: Elem, jmask: u32) -> bool {
        self.support_mask(e) & !jmask == 0
    }

    /// Elements of ⟨J⟩ in id order.
    pub fn parabolic(&self, j: &[Gen]) -> Vec<Elem> {
        let mask = self.gen_mask(j);
        self.elems().filter(|&e| self.in_parabolic(e, mask)).collect()
    }

    /// Longest element r_J of the standard parabolic ⟨J⟩; W is finite, so the
    /// maximum is attained and unique.
    pub fn longest_element(&self, j: &[Gen]) -> Elem {
        let mask = self.gen_mask(j);
        let mut best = Elem::IDENTITY;
        for e in self.elems() {
            if self.in_parabolic(e, mask) && self.len(e) > self.len(best) {
                best = e;
            }
        }
        debug_assert!(
            self.elems().all(|e| !(self.in_parabolic(e, mask)
                && self.len(e) == self.len(best)
                && e != best)),
            "longest parabolic element is unique"
        );
        best
    }
}
