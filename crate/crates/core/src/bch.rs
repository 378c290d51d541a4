//! Binary t-error-correcting BCH component codes with optional single or
//! double extension and shortening.
//!
//! Word layout (length `n`): positions `0..core_len` carry the BCH bits,
//! position `i` being the coefficient of `x^i`; the top `s` exponents of the
//! mother code are shortened away. Positions `core_len..n` hold the `e`
//! extension parities. With `e = 1` the single parity makes the overall
//! weight even. With `e = 2` the first extra bit checks the odd exponents
//! and the second the even exponents, so odd and even bit positions are
//! checked separately.
//!
//! Syndromes store the odd-power evaluations `S_1, S_3, …, S_{2t-1}` plus
//! `e` parity bits; even powers are recomputed as squares when decoding.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::galois::{Element, FieldTable};

/// Largest supported error-correcting capability.
pub const MAX_T: usize = 16;

/// Error positions found by a component decoder, ascending.
pub type ErrorPositions = ArrayVec<u16, MAX_T>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Syndrome {
    odd: [Element; MAX_T],
    parity: u8,
}

impl Syndrome {
    pub const ZERO: Syndrome = Syndrome {
        odd: [0; MAX_T],
        parity: 0,
    };

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.parity == 0 && self.odd.iter().all(|&s| s == 0)
    }

    /// `S_1, S_3, …` (only the first `t` entries are meaningful).
    pub fn odd_powers(&self) -> &[Element; MAX_T] {
        &self.odd
    }

    /// Extension parity-check bits, bit `i` for extension equation `i`.
    pub fn parity_bits(&self) -> u8 {
        self.parity
    }

    /// Builds a syndrome from raw values; missing odd powers are zero.
    pub fn from_parts(odd: &[Element], parity: u8) -> Syndrome {
        let mut syn = Syndrome::ZERO;
        syn.odd[..odd.len()].copy_from_slice(odd);
        syn.parity = parity;
        syn
    }
}

impl std::ops::BitXorAssign for Syndrome {
    #[inline]
    fn bitxor_assign(&mut self, rhs: Self) {
        for (a, b) in self.odd.iter_mut().zip(rhs.odd.iter()) {
            *a ^= b;
        }
        self.parity ^= rhs.parity;
    }
}

impl std::ops::BitXor for Syndrome {
    type Output = Syndrome;
    fn bitxor(mut self, rhs: Self) -> Syndrome {
        self ^= rhs;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Corrected(ErrorPositions),
    Fail,
}

impl DecodeOutcome {
    pub fn is_corrected(&self) -> bool {
        matches!(self, DecodeOutcome::Corrected(_))
    }

    pub fn positions(&self) -> &[u16] {
        match self {
            DecodeOutcome::Corrected(p) => p,
            DecodeOutcome::Fail => &[],
        }
    }
}

#[derive(Clone, Debug)]
pub struct BchCode {
    field: FieldTable,
    nu: u32,
    t: usize,
    e: usize,
    s: usize,
    core_len: usize,
    n: usize,
    k: usize,
    d_min: usize,
    /// Generator polynomial coefficients, lowest degree first.
    gen_poly: Vec<u8>,
    /// Parity-check column of every word position.
    columns: Vec<Syndrome>,
    /// Syndrome-indexed decoding table for short syndromes.
    table: Option<DecodeTable>,
}

/// Largest syndrome width, in bits, served by a lookup table.
const TABLE_BITS: usize = 20;

/// Maps each packed syndrome to the pattern of weight ≤ t producing it.
#[derive(Clone, Debug)]
struct DecodeTable {
    slots: Vec<u32>,
    patterns: Vec<ErrorPositions>,
}

impl DecodeTable {
    const EMPTY: u32 = u32::MAX;

    fn build(code: &BchCode) -> Self {
        let mut table = Self {
            slots: vec![Self::EMPTY; 1 << code.syndrome_bits()],
            patterns: Vec::new(),
        };
        let mut current = ErrorPositions::new();
        table.extend(code, &mut current, Syndrome::ZERO, 0);
        table
    }

    fn extend(&mut self, code: &BchCode, current: &mut ErrorPositions, syn: Syndrome, from: usize) {
        let key = code.pack(&syn);
        debug_assert_eq!(self.slots[key], Self::EMPTY, "patterns of weight <= t have distinct syndromes");
        self.slots[key] = self.patterns.len() as u32;
        self.patterns.push(current.clone());
        if current.len() == code.t {
            return;
        }
        for pos in from..code.n {
            current.push(pos as u16);
            self.extend(code, current, syn ^ code.columns[pos], pos + 1);
            current.pop();
        }
    }

    fn lookup(&self, key: usize) -> Option<&ErrorPositions> {
        match self.slots[key] {
            Self::EMPTY => None,
            i => Some(&self.patterns[i as usize]),
        }
    }
}

impl BchCode {
    /// Builds the (ν, t, e, s) code: the narrow-sense primitive BCH code of
    /// length 2^ν−1 correcting `t` errors, extended by `e` parity bits and
    /// shortened by `s` information bits.
    pub fn new(nu: u32, t: usize, e: usize, s: usize) -> Result<Self> {
        let field = FieldTable::new(nu)?;
        if t == 0 || t > MAX_T {
            return Err(Error::Parameter(format!(
                "t={t} outside supported range 1..={MAX_T}"
            )));
        }
        if e > 2 {
            return Err(Error::Parameter(format!("extension e={e} must be 0, 1 or 2")));
        }
        let mother_len = field.order();
        if 2 * t >= mother_len {
            return Err(Error::Parameter(format!(
                "t={t} too large for mother length {mother_len}"
            )));
        }
        let gen_poly = generator_polynomial(&field, t);
        let redundancy = gen_poly.len() - 1;
        if redundancy + s >= mother_len {
            return Err(Error::Parameter(format!(
                "shortening s={s} leaves no information bits (mother dimension {})",
                mother_len - redundancy
            )));
        }
        let core_len = mother_len - s;
        let n = core_len + e;
        let k = mother_len - redundancy - s;
        let d_min = if e == 0 { 2 * t + 1 } else { 2 * t + 2 };

        let mut columns = Vec::with_capacity(n);
        for i in 0..core_len {
            let mut col = Syndrome::ZERO;
            for (j, slot) in col.odd.iter_mut().take(t).enumerate() {
                *slot = field.alpha_pow((i * (2 * j + 1)) as i64);
            }
            col.parity = match e {
                0 => 0,
                1 => 1,
                _ => {
                    if i % 2 == 1 {
                        0b01
                    } else {
                        0b10
                    }
                }
            };
            columns.push(col);
        }
        for x in 0..e {
            let mut col = Syndrome::ZERO;
            col.parity = 1 << x;
            columns.push(col);
        }

        let mut code = Self {
            field,
            nu,
            t,
            e,
            s,
            core_len,
            n,
            k,
            d_min,
            gen_poly,
            columns,
            table: None,
        };
        if code.syndrome_bits() <= TABLE_BITS {
            code.table = Some(DecodeTable::build(&code));
        }
        Ok(code)
    }

    /// Packs the syndrome into `syndrome_bits()` bits.
    fn pack(&self, syn: &Syndrome) -> usize {
        let mut key = syn.parity as usize;
        for &s in &syn.odd[..self.t] {
            key = key << self.nu | s as usize;
        }
        key
    }

    pub fn field(&self) -> &FieldTable {
        &self.field
    }
    pub fn nu(&self) -> u32 {
        self.nu
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn e(&self) -> usize {
        self.e
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d_min(&self) -> usize {
        self.d_min
    }
    /// Number of transmitted BCH (non-extension) positions.
    pub fn core_len(&self) -> usize {
        self.core_len
    }
    pub fn gen_poly(&self) -> &[u8] {
        &self.gen_poly
    }
    /// Number of redundancy bits in the syndrome, ν·t + e.
    pub fn syndrome_bits(&self) -> usize {
        self.nu as usize * self.t + self.e
    }
    /// Rate k/n of the component code.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Parity-check column for one position.
    #[inline]
    pub fn column(&self, pos: usize) -> Syndrome {
        self.columns[pos]
    }

    /// Systematic encoder. Message bit `i` lands at position `deg(g) + i`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k {
            return Err(Error::Parameter(format!(
                "message length {} != k={}",
                message.len(),
                self.k
            )));
        }
        let r = self.gen_poly.len() - 1;
        let mut word = vec![0u8; self.n];
        word[r..r + self.k].copy_from_slice(message);
        // Long division of m(x)·x^r by g(x), leaving the remainder in 0..r.
        let mut rem = word[..self.core_len].to_vec();
        for deg in (r..self.core_len).rev() {
            if rem[deg] & 1 == 1 {
                for (j, &g) in self.gen_poly.iter().enumerate() {
                    rem[deg - r + j] ^= g;
                }
            }
        }
        word[..r].copy_from_slice(&rem[..r]);
        let (odd, even) = core_parities(&word[..self.core_len]);
        match self.e {
            1 => word[self.core_len] = odd ^ even,
            2 => {
                word[self.core_len] = odd;
                word[self.core_len + 1] = even;
            }
            _ => {}
        }
        Ok(word)
    }

    /// Positions of the message bits inside an encoded word.
    pub fn message_positions(&self) -> std::ops::Range<usize> {
        let r = self.gen_poly.len() - 1;
        r..r + self.k
    }

    pub fn syndrome(&self, word: &[u8]) -> Result<Syndrome> {
        if word.len() != self.n {
            return Err(Error::Parameter(format!(
                "word length {} != n={}",
                word.len(),
                self.n
            )));
        }
        Ok(self.syndrome_of_support(
            word.iter()
                .enumerate()
                .filter(|(_, &b)| b & 1 == 1)
                .map(|(i, _)| i),
        ))
    }

    pub fn syndrome_of_support(&self, support: impl IntoIterator<Item = usize>) -> Syndrome {
        let mut syn = Syndrome::ZERO;
        for i in support {
            syn ^= self.columns[i];
        }
        syn
    }

    /// Bounded-distance decoding with the full capability `t`.
    pub fn bdd_decode(&self, syn: &Syndrome) -> DecodeOutcome {
        self.bdd_decode_limited(syn, self.t)
    }

    /// Bounded-distance decoding that only accepts error patterns of weight
    /// at most `limit` (≤ t). Patterns of weight in `limit+1..=t` are
    /// reported as failures.
    pub fn bdd_decode_limited(&self, syn: &Syndrome, limit: usize) -> DecodeOutcome {
        let limit = limit.min(self.t);
        if let Some(table) = &self.table {
            return match table.lookup(self.pack(syn)) {
                Some(p) if p.len() <= limit => DecodeOutcome::Corrected(p.clone()),
                _ => DecodeOutcome::Fail,
            };
        }
        self.algebraic_decode(syn, limit)
    }

    /// Bounded-distance decoding through Berlekamp–Massey and Chien search,
    /// bypassing the lookup table.
    pub fn algebraic_bdd_decode(&self, syn: &Syndrome) -> DecodeOutcome {
        self.algebraic_decode(syn, self.t)
    }

    /// Berlekamp–Massey based decoding, used when no table is available.
    fn algebraic_decode(&self, syn: &Syndrome, limit: usize) -> DecodeOutcome {
        let mut positions = ErrorPositions::new();
        let core_zero = syn.odd[..self.t].iter().all(|&s| s == 0);
        if !core_zero && !self.locate_core_errors(&syn.odd, &mut positions) {
            return DecodeOutcome::Fail;
        }
        // The parity residual after removing the core pattern fixes which
        // extension bits must be in error.
        let mut residual = syn.parity;
        for &p in &positions {
            residual ^= self.columns[p as usize].parity;
        }
        let ext_flips = residual.count_ones() as usize;
        if positions.len() + ext_flips > limit {
            return DecodeOutcome::Fail;
        }
        for x in 0..self.e {
            if residual >> x & 1 == 1 {
                positions.push((self.core_len + x) as u16);
            }
        }
        DecodeOutcome::Corrected(positions)
    }

    /// Berlekamp–Massey plus Chien search over the unshortened positions.
    /// Returns false when no pattern of weight ≤ t inside the transmitted
    /// core explains the syndrome.
    fn locate_core_errors(&self, odd: &[Element; MAX_T], out: &mut ErrorPositions) -> bool {
        let f = &self.field;
        let t = self.t;
        // S[1..=2t]
        let mut s = [0 as Element; 2 * MAX_T + 1];
        for i in 1..=2 * t {
            s[i] = if i % 2 == 1 {
                odd[i / 2]
            } else {
                f.square(s[i / 2])
            };
        }

        if s[1] != 0 && t >= 1 {
            // Fast path: a single error at exponent log(S1) explains all syndromes.
            let pos = f.log(s[1]).unwrap();
            if (1..t).all(|j| s[2 * j + 1] == f.pow(s[1], (2 * j + 1) as u64)) {
                if pos < self.core_len {
                    out.push(pos as u16);
                    return true;
                }
                return false;
            }
        }

        let mut lambda = [0 as Element; 2 * MAX_T + 2];
        let mut prev = [0 as Element; 2 * MAX_T + 2];
        lambda[0] = 1;
        prev[0] = 1;
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut prev_disc: Element = 1;
        for r in 0..2 * t {
            let mut d = s[r + 1];
            for i in 1..=len {
                d ^= f.mul(lambda[i], s[r + 1 - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = f.mul(d, f.inv(prev_disc).expect("nonzero discrepancy"));
            let snapshot = lambda;
            for i in 0..lambda.len().saturating_sub(shift) {
                if prev[i] != 0 {
                    lambda[i + shift] ^= f.mul(coef, prev[i]);
                }
            }
            if 2 * len <= r {
                len = r + 1 - len;
                prev = snapshot;
                prev_disc = d;
                shift = 1;
            } else {
                shift += 1;
            }
            if len > t {
                return false;
            }
        }
        let degree = lambda.iter().rposition(|&c| c != 0).unwrap_or(0);
        if degree != len || len == 0 || len > t {
            return false;
        }
        // Chien search: α^{-i} is a root ⇔ error at exponent i.
        let ord = f.order();
        let mut terms: ArrayVec<(Element, usize), { MAX_T + 1 }> = ArrayVec::new();
        for (j, &c) in lambda.iter().enumerate().take(len + 1).skip(1) {
            if c != 0 {
                terms.push((c, j));
            }
        }
        let log_terms: ArrayVec<(usize, usize), { MAX_T + 1 }> = terms
            .iter()
            .map(|&(c, j)| (f.log(c).unwrap(), j))
            .collect();
        let exp = f.exp_table();
        for i in 0..self.core_len {
            let mut acc: Element = 1;
            for &(lc, j) in &log_terms {
                acc ^= exp[(lc + ord - (i * j) % ord) % ord];
            }
            if acc == 0 {
                out.push(i as u16);
                if out.len() == len {
                    return true;
                }
            }
        }
        out.clear();
        false
    }

    /// Genie-aided bounded-distance decoding: corrects iff the received word
    /// lies within distance `t` of the true codeword and never miscorrects.
    pub fn idealized_bdd_decode(&self, received: &[u8], true_codeword: &[u8]) -> Result<DecodeOutcome> {
        if received.len() != self.n || true_codeword.len() != self.n {
            return Err(Error::Parameter("word length mismatch".into()));
        }
        if !self.syndrome(true_codeword)?.is_zero() {
            return Err(Error::Parameter("true codeword is not a codeword".into()));
        }
        let mut positions = ErrorPositions::new();
        for (i, (&r, &c)) in received.iter().zip(true_codeword).enumerate() {
            if (r ^ c) & 1 == 1 {
                if positions.is_full() || positions.len() == self.t {
                    return Ok(DecodeOutcome::Fail);
                }
                positions.push(i as u16);
            }
        }
        Ok(DecodeOutcome::Corrected(positions))
    }

    /// Fills in erased positions of `word` using the parity checks. The
    /// non-erased bits are trusted. Returns `None` when the restricted
    /// system is inconsistent or does not determine the erased bits.
    pub fn erasure_decode(&self, word: &[u8], erasures: &[usize]) -> Result<Option<Vec<u8>>> {
        if word.len() != self.n {
            return Err(Error::Parameter("word length mismatch".into()));
        }
        if let Some(&bad) = erasures.iter().find(|&&p| p >= self.n) {
            return Err(Error::Parameter(format!("erasure position {bad} >= n={}", self.n)));
        }
        let mut erased = vec![false; self.n];
        for &p in erasures {
            erased[p] = true;
        }
        let known = self.syndrome_of_support(
            (0..self.n).filter(|&i| !erased[i] && word[i] & 1 == 1),
        );
        let mut positions: Vec<usize> = erasures.to_vec();
        positions.sort_unstable();
        positions.dedup();
        let Some(values) = self.solve_erasures(&known, &positions) else {
            return Ok(None);
        };
        let mut out = word.to_vec();
        for (&p, &v) in positions.iter().zip(&values) {
            out[p] = v;
        }
        Ok(Some(out))
    }

    /// Solves `Σ_{p ∈ positions} x_p · column(p) = target` over GF(2).
    /// Returns the unique solution, or `None` when there is none or many.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_erasures(&self, target: &Syndrome, positions: &[usize]) -> Option<Vec<u8>> {
        let rows = self.syndrome_bits();
        let unknowns = positions.len();
        if unknowns == 0 {
            return target.is_zero().then(Vec::new);
        }
        if unknowns > rows {
            return None;
        }
        let words = unknowns.div_ceil(64);
        let mut matrix: Vec<Vec<u64>> = vec![vec![0u64; words]; rows];
        let mut rhs = vec![0u8; rows];
        let nu = self.nu as usize;
        let bit_of = |syn: &Syndrome, row: usize| -> u8 {
            if row < nu * self.t {
                ((syn.odd[row / nu] >> (row % nu)) & 1) as u8
            } else {
                (syn.parity >> (row - nu * self.t)) & 1
            }
        };
        for (c, &p) in positions.iter().enumerate() {
            let col = self.columns[p];
            for (r, row) in matrix.iter_mut().enumerate() {
                if bit_of(&col, r) == 1 {
                    row[c / 64] |= 1 << (c % 64);
                }
            }
        }
        for (r, v) in rhs.iter_mut().enumerate() {
            *v = bit_of(target, r);
        }

        let mut pivot_row_of_col = vec![usize::MAX; unknowns];
        let mut next = 0;
        for c in 0..unknowns {
            let (w, b) = (c / 64, 1u64 << (c % 64));
            let Some(pr) = (next..rows).find(|&r| matrix[r][w] & b != 0) else {
                return None; // rank deficient: erased bits not determined
            };
            matrix.swap(next, pr);
            rhs.swap(next, pr);
            for r in 0..rows {
                if r != next && matrix[r][w] & b != 0 {
                    let (src, dst) = if r < next {
                        let (lo, hi) = matrix.split_at_mut(next);
                        (&hi[0], &mut lo[r])
                    } else {
                        let (lo, hi) = matrix.split_at_mut(r);
                        (&lo[next], &mut hi[0])
                    };
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d ^= s;
                    }
                    rhs[r] ^= rhs[next];
                }
            }
            pivot_row_of_col[c] = next;
            next += 1;
        }
        if rhs[next..].iter().any(|&v| v != 0) {
            return None;
        }
        Some(pivot_row_of_col.iter().map(|&r| rhs[r]).collect())
    }
}

/// XOR of core bits at odd and at even exponents.
fn core_parities(core: &[u8]) -> (u8, u8) {
    let mut odd = 0;
    let mut even = 0;
    for (i, &b) in core.iter().enumerate() {
        if i % 2 == 1 {
            odd ^= b & 1;
        } else {
            even ^= b & 1;
        }
    }
    (odd, even)
}

/// Product of the minimal polynomials of α, α^3, …, α^(2t−1), as GF(2)
/// coefficients lowest degree first.
fn generator_polynomial(field: &FieldTable, t: usize) -> Vec<u8> {
    let ord = field.order();
    let mut in_roots = vec![false; ord];
    for j in 0..t {
        let mut x = (2 * j + 1) % ord;
        while !in_roots[x] {
            in_roots[x] = true;
            x = (2 * x) % ord;
        }
    }
    let mut poly: Vec<Element> = vec![1];
    for (root_exp, _) in in_roots.iter().enumerate().filter(|(_, &r)| r) {
        let root = field.alpha_pow(root_exp as i64);
        let mut next = vec![0 as Element; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= field.mul(c, root);
        }
        poly = next;
    }
    poly.into_iter()
        .map(|c| {
            debug_assert!(c <= 1, "generator coefficients must be binary");
            c as u8
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_codewords(code: &BchCode) -> Vec<Vec<u8>> {
        (0u64..1 << code.k())
            .map(|m| {
                let msg: Vec<u8> = (0..code.k()).map(|i| (m >> i & 1) as u8).collect();
                code.encode(&msg).unwrap()
            })
            .collect()
    }

    #[test]
    fn reference_code_parameters() {
        let c = BchCode::new(7, 2, 1, 0).unwrap();
        assert_eq!((c.n(), c.k(), c.d_min()), (128, 113, 6));
        let rate = (c.k() * c.k()) as f64 / (c.n() * c.n()) as f64;
        assert!((rate - 0.78).abs() < 0.005);

        let c = BchCode::new(8, 2, 1, 61).unwrap();
        assert_eq!((c.n(), c.k()), (195, 178));
        let rate = (178.0f64 / 195.0).powi(2);
        assert!((rate - 0.833).abs() < 0.001);

        let c = BchCode::new(4, 2, 0, 0).unwrap();
        assert_eq!((c.n(), c.k(), c.d_min()), (15, 7, 5));
        // g(x) = x^8 + x^7 + x^6 + x^4 + 1 for x^4+x+1.
        assert_eq!(c.gen_poly(), &[1, 0, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn invalid_parameters() {
        assert!(BchCode::new(2, 1, 0, 0).is_err());
        assert!(BchCode::new(4, 0, 0, 0).is_err());
        assert!(BchCode::new(4, 2, 3, 0).is_err());
        assert!(BchCode::new(4, 2, 0, 7).is_err());
        assert!(BchCode::new(4, 2, 0, 6).is_ok());
    }

    #[test]
    fn encode_zero_and_syndromes() {
        let code = BchCode::new(4, 2, 0, 0).unwrap();
        assert_eq!(code.encode(&[0; 7]).unwrap(), vec![0; 15]);
        assert!(code.syndrome(&[0; 15]).unwrap().is_zero());
        assert!(code.encode(&[0; 6]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let msg: Vec<u8> = (0..7).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&msg).unwrap();
            assert!(code.syndrome(&cw).unwrap().is_zero());
            assert_eq!(&cw[code.message_positions()], &msg[..]);
        }
    }

    #[test]
    fn extended_and_shortened_codewords_satisfy_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (nu, t, e, s) in [(5, 2, 1, 0), (5, 2, 2, 3), (6, 3, 2, 0), (8, 2, 1, 61)] {
            let code = BchCode::new(nu, t, e, s).unwrap();
            for _ in 0..50 {
                let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
                let cw = code.encode(&msg).unwrap();
                assert!(code.syndrome(&cw).unwrap().is_zero());
                let weight: u32 = cw.iter().map(|&b| b as u32).sum();
                if e >= 1 {
                    assert_eq!(weight % 2, 0);
                }
                if e == 2 {
                    let odd1: u8 = cw[..code.core_len()].iter().step_by(2).fold(0, |a, b| a ^ b);
                    assert_eq!(odd1 ^ cw[code.core_len() + 1], 0);
                }
            }
        }
    }

    #[test]
    fn exhaustive_minimum_distance_4_2_0() {
        let code = BchCode::new(4, 2, 0, 0).unwrap();
        let words = all_codewords(&code);
        assert_eq!(words.len(), 128);
        let min_w = words
            .iter()
            .map(|w| w.iter().map(|&b| b as usize).sum::<usize>())
            .filter(|&w| w > 0)
            .min()
            .unwrap();
        assert_eq!(min_w, 5);
    }

    #[test]
    fn extended_minimum_distance_is_even() {
        let code = BchCode::new(4, 2, 1, 0).unwrap();
        let min_w = all_codewords(&code)
            .iter()
            .map(|w| w.iter().map(|&b| b as usize).sum::<usize>())
            .filter(|&w| w > 0)
            .min()
            .unwrap();
        assert_eq!(min_w, 6);
    }

    #[test]
    fn single_error_syndromes_are_distinct() {
        let code = BchCode::new(4, 2, 0, 0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..15 {
            let s = code.syndrome_of_support([i]);
            assert!(!s.is_zero());
            assert!(seen.insert(s));
        }
    }

    #[test]
    fn syndrome_is_linear() {
        let code = BchCode::new(7, 2, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: Vec<u8> = (0..128).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..128).map(|_| rng.random_range(0..2)).collect();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            assert_eq!(
                code.syndrome(&ab).unwrap(),
                code.syndrome(&a).unwrap() ^ code.syndrome(&b).unwrap()
            );
        }
    }

    #[test]
    fn lookup_table_agrees_with_algebraic_decoder() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for (nu, t, e, s) in [(4, 2, 0, 0), (5, 3, 2, 3), (7, 2, 1, 0), (8, 2, 1, 61), (6, 3, 0, 10)] {
            let code = BchCode::new(nu, t, e, s).unwrap();
            assert!(code.table.is_some());
            let bits = code.syndrome_bits();
            let trials = (1usize << bits).min(200_000);
            for i in 0..trials {
                let key = if bits <= 17 { i } else { rng.random_range(0..1usize << bits) };
                let mut syn = Syndrome::ZERO;
                syn.parity = (key >> (nu as usize * t)) as u8;
                for j in 0..t {
                    syn.odd[j] = ((key >> (nu as usize * (t - 1 - j))) & ((1 << nu) - 1)) as u16;
                }
                assert_eq!(code.pack(&syn), key);
                for limit in 1..=t {
                    assert_eq!(code.bdd_decode_limited(&syn, limit), code.algebraic_decode(&syn, limit), "{key}");
                }
            }
        }
    }

    #[test]
    fn zero_syndrome_decodes_to_nothing() {
        let code = BchCode::new(7, 2, 1, 0).unwrap();
        assert_eq!(code.bdd_decode(&Syndrome::ZERO), DecodeOutcome::Corrected(ErrorPositions::new()));
    }

    #[test]
    fn decodes_every_pattern_up_to_t_exhaustively_small() {
        for (nu, t, e, s) in [(4, 2, 0, 0), (4, 2, 1, 0), (4, 2, 2, 0), (5, 3, 0, 0), (5, 2, 1, 4)] {
            let code = BchCode::new(nu, t, e, s).unwrap();
            let n = code.n();
            let mut patterns: Vec<Vec<usize>> = vec![vec![]];
            for w in 1..=t {
                let mut next = vec![];
                for p in patterns.iter().filter(|p| p.len() == w - 1) {
                    let start = p.last().map_or(0, |&x| x + 1);
                    for i in start..n {
                        let mut q = p.clone();
                        q.push(i);
                        next.push(q);
                    }
                }
                patterns.extend(next);
            }
            for p in &patterns {
                let out = code.bdd_decode(&code.syndrome_of_support(p.iter().copied()));
                let got: Vec<usize> = out.positions().iter().map(|&x| x as usize).collect();
                assert!(out.is_corrected(), "{nu},{t},{e},{s}: {p:?}");
                assert_eq!(&got, p);
            }
        }
    }

    #[test]
    fn reduced_limit_rejects_heavier_patterns() {
        let code = BchCode::new(7, 2, 1, 0).unwrap();
        let two = code.syndrome_of_support([3, 90]);
        assert!(code.bdd_decode(&two).is_corrected());
        assert_eq!(code.bdd_decode_limited(&two, 1), DecodeOutcome::Fail);
        let one = code.syndrome_of_support([127]);
        assert_eq!(code.bdd_decode_limited(&one, 1).positions(), &[127]);
    }

    #[test]
    fn weight_three_miscorrection_exists_4_2_0() {
        // Structure of the classic miscorrection: three channel errors, decoder
        // flips two more bits landing on a weight-5 codeword.
        let code = BchCode::new(4, 2, 0, 0).unwrap();
        let codewords = all_codewords(&code);
        let mut found = false;
        'outer: for a in 0..15 {
            for b in a + 1..15 {
                for c in b + 1..15 {
                    let out = code.bdd_decode(&code.syndrome_of_support([a, b, c]));
                    if let DecodeOutcome::Corrected(pos) = out {
                        assert_eq!(pos.len(), 2);
                        let mut word = vec![0u8; 15];
                        for i in [a, b, c] {
                            word[i] ^= 1;
                        }
                        for &p in &pos {
                            word[p as usize] ^= 1;
                        }
                        assert!(codewords.contains(&word));
                        assert_eq!(word.iter().filter(|&&x| x == 1).count(), 5);
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn decodable_syndrome_count_7_2_0() {
        let code = BchCode::new(7, 2, 0, 0).unwrap();
        let mut ok = 0u32;
        let mut syn = Syndrome::ZERO;
        for s1 in 0..128u16 {
            for s3 in 0..128u16 {
                syn.odd[0] = s1;
                syn.odd[1] = s3;
                if code.bdd_decode(&syn).is_corrected() {
                    ok += 1;
                }
            }
        }
        assert_eq!(ok, 1 + 127 + 8001);
    }

    #[test]
    fn shortened_positions_never_reported() {
        let code = BchCode::new(5, 2, 0, 10).unwrap();
        let full = BchCode::new(5, 2, 0, 0).unwrap();
        let mut rejected = 0;
        for a in 0..31 {
            for b in a + 1..31 {
                let s = full.syndrome_of_support([a, b]);
                let out = code.bdd_decode(&s);
                if a >= 21 || b >= 21 {
                    assert_eq!(out, DecodeOutcome::Fail);
                    rejected += 1;
                } else {
                    assert_eq!(out.positions(), &[a as u16, b as u16]);
                }
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn idealized_decoder_cases() {
        let code = BchCode::new(7, 2, 1, 0).unwrap();
        let zero = vec![0u8; 128];
        assert_eq!(code.idealized_bdd_decode(&zero, &zero).unwrap().positions(), &[] as &[u16]);
        let mut r = zero.clone();
        for i in [5, 17, 99] {
            r[i] = 1;
        }
        assert_eq!(code.idealized_bdd_decode(&r, &zero).unwrap(), DecodeOutcome::Fail);
        let mut bad = zero.clone();
        bad[0] = 1;
        assert!(code.idealized_bdd_decode(&r, &bad).is_err());
    }

    #[test]
    fn idealized_matches_true_bdd_without_miscorrection() {
        let code = BchCode::new(6, 2, 0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zero = vec![0u8; code.n()];
        for _ in 0..100_000 {
            let mut r = zero.clone();
            for b in r.iter_mut() {
                *b = rng.random_bool(0.04) as u8;
            }
            let real = code.bdd_decode(&code.syndrome(&r).unwrap());
            let ideal = code.idealized_bdd_decode(&r, &zero).unwrap();
            let weight = r.iter().filter(|&&b| b == 1).count();
            let miscorrected = real.is_corrected() && weight > code.t();
            if !miscorrected {
                assert_eq!(real, ideal);
            }
        }
    }

    /// Rank of the parity-check submatrix, by plain elimination on explicit rows.
    fn rank_oracle(code: &BchCode, positions: &[usize]) -> usize {
        let rows = code.syndrome_bits();
        let nu = code.nu() as usize;
        let mut m: Vec<Vec<u8>> = (0..rows)
            .map(|r| {
                positions
                    .iter()
                    .map(|&p| {
                        let col = code.column(p);
                        if r < nu * code.t() {
                            ((col.odd_powers()[r / nu] >> (r % nu)) & 1) as u8
                        } else {
                            (col.parity_bits() >> (r - nu * code.t())) & 1
                        }
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for c in 0..positions.len() {
            if let Some(p) = (rank..rows).find(|&r| m[r][c] == 1) {
                m.swap(rank, p);
                for r in 0..rows {
                    if r != rank && m[r][c] == 1 {
                        let pivot = m[rank].clone();
                        for (x, y) in m[r].iter_mut().zip(pivot) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn erasure_decoding() {
        let code = BchCode::new(4, 2, 0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msg: Vec<u8> = (0..7).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&msg).unwrap();
        assert_eq!(code.erasure_decode(&cw, &[]).unwrap(), Some(cw.clone()));
        for _ in 0..300 {
            let msg: Vec<u8> = (0..7).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&msg).unwrap();
            let mut pos: Vec<usize> = (0..15).collect();
            for i in 0..15 {
                pos.swap(i, rng.random_range(i..15));
            }
            // Any d_min − 1 erasures are recoverable.
            let erased = &pos[..4];
            let mut dirty = cw.clone();
            for &p in erased {
                dirty[p] = rng.random_range(0..2);
            }
            assert_eq!(code.erasure_decode(&dirty, erased).unwrap(), Some(cw.clone()));
            // Up to n − k erasures: success exactly when the submatrix has full rank.
            let size = rng.random_range(5..=8);
            let erased = &pos[..size];
            let out = code.erasure_decode(&dirty, erased).unwrap();
            let full_rank = rank_oracle(&code, erased) == size;
            assert_eq!(out.is_some(), full_rank);
            if let Some(w) = out {
                assert_eq!(w, cw);
            }
        }
        assert!(code.erasure_decode(&cw, &[15]).is_err());
    }

    #[test]
    fn erasure_decoding_extended_shortened() {
        let code = BchCode::new(8, 2, 1, 61).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&msg).unwrap();
            let mut erased: Vec<usize> = (0..5).map(|_| rng.random_range(0..code.n())).collect();
            erased.sort_unstable();
            erased.dedup();
            let mut dirty = cw.clone();
            for &p in &erased {
                dirty[p] ^= 1;
            }
            assert_eq!(code.erasure_decode(&dirty, &erased).unwrap(), Some(cw));
        }
    }
}
