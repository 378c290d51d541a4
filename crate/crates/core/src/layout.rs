//! Bit ↔ codeword incidence of a generalized product code, together with
//! the order in which component codewords are visited.
//!
//! Every transmitted bit is protected by exactly two component codewords.
//! Codewords are addressed by a dense index internally and by a
//! [`CodewordId`] `(type, index)` externally. Positions of a codeword that
//! are known to be zero without being transmitted (the virtual blocks that
//! terminate a staircase) map to [`VIRTUAL_BIT`].

use std::sync::Arc;

use serde::Serialize;

use crate::bch::BchCode;
use crate::error::{Error, Result};

/// Marker for a codeword position that is fixed to zero and not transmitted.
pub const VIRTUAL_BIT: u32 = u32::MAX;

/// Codeword address: `ty` is the codeword type (1 = rows and 2 = columns
/// for product codes, the block position for staircase codes) and `index`
/// counts from zero within the type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CodewordId {
    pub ty: u16,
    pub index: u32,
}

impl CodewordId {
    pub const fn new(ty: u16, index: u32) -> Self {
        Self { ty, index }
    }
}

impl std::fmt::Display for CodewordId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.ty, self.index)
    }
}

/// One window position of the schedule. Each iteration visits the groups
/// in order; each group is one half-iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleStep {
    pub groups: Vec<Vec<u32>>,
}

impl ScheduleStep {
    pub fn codewords(&self) -> impl Iterator<Item = u32> + '_ {
        self.groups.iter().flatten().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayoutKind {
    Product,
    Staircase { num_blocks: usize, window: usize },
}

#[derive(Clone, Debug)]
pub struct GpcLayout {
    code: Arc<BchCode>,
    kind: LayoutKind,
    ids: Vec<CodewordId>,
    /// Dense index of the first codeword of each type (types are 1-based).
    type_offsets: Vec<usize>,
    /// `n` entries per codeword.
    cw_bits: Vec<u32>,
    /// The two `(codeword, position)` pairs of each bit.
    incidence: Vec<[(u32, u16); 2]>,
    side: Vec<u8>,
    schedule: Vec<ScheduleStep>,
}

impl GpcLayout {
    /// Product code: `n × n` array, row `j` is codeword `(1, j)` and column
    /// `l` is codeword `(2, l)`. Bit `(r, c)` sits at position `c` of its
    /// row and position `r` of its column.
    pub fn product(code: Arc<BchCode>) -> Self {
        let n = code.n();
        let mut ids = Vec::with_capacity(2 * n);
        let mut cw_bits = vec![0u32; 2 * n * n];
        for r in 0..n {
            ids.push(CodewordId::new(1, r as u32));
            for c in 0..n {
                cw_bits[r * n + c] = (r * n + c) as u32;
            }
        }
        for c in 0..n {
            ids.push(CodewordId::new(2, c as u32));
            for r in 0..n {
                cw_bits[(n + c) * n + r] = (r * n + c) as u32;
            }
        }
        let side = (0..2 * n).map(|i| (i >= n) as u8).collect();
        let schedule = vec![ScheduleStep {
            groups: vec![(0..n as u32).collect(), (n as u32..2 * n as u32).collect()],
        }];
        Self::assemble(code, LayoutKind::Product, ids, vec![0, 0, n, 2 * n], cw_bits, side, n * n, schedule)
    }

    /// Staircase code with `num_blocks` transmitted `m × m` blocks
    /// (`m = n/2`), framed by virtual all-zero blocks `B_0` and
    /// `B_{num_blocks+1}`. Codeword `(i, r)` for `i = 1..=num_blocks+1`
    /// is column `r` of `B_{i-1}` followed by row `r` of `B_i`.
    ///
    /// The schedule slides over `num_blocks − window + 1` positions; at
    /// position `w` it decodes the codeword types touching blocks
    /// `w..w+window`, oldest type first.
    pub fn staircase(code: Arc<BchCode>, num_blocks: usize, window: usize) -> Result<Self> {
        let n = code.n();
        if !n.is_multiple_of(2) {
            return Err(Error::Parameter(format!("staircase needs even component length, got n={n}")));
        }
        if window < 2 || num_blocks < window {
            return Err(Error::Parameter(format!(
                "staircase needs num_blocks >= window >= 2 (num_blocks={num_blocks}, window={window})"
            )));
        }
        let m = n / 2;
        let num_types = num_blocks + 1;
        let bit = |blk: usize, r: usize, c: usize| -> u32 {
            if blk == 0 || blk > num_blocks {
                VIRTUAL_BIT
            } else {
                ((blk - 1) * m * m + r * m + c) as u32
            }
        };
        let mut ids = Vec::with_capacity(num_types * m);
        let mut cw_bits = Vec::with_capacity(num_types * m * n);
        let mut type_offsets = vec![0usize];
        let mut side = Vec::with_capacity(num_types * m);
        for ty in 1..=num_types {
            type_offsets.push(ids.len());
            for r in 0..m {
                ids.push(CodewordId::new(ty as u16, r as u32));
                side.push((ty % 2) as u8);
                for q in 0..m {
                    cw_bits.push(bit(ty - 1, q, r));
                }
                for c in 0..m {
                    cw_bits.push(bit(ty, r, c));
                }
            }
        }
        type_offsets.push(ids.len());
        let type_range = |ty: usize| (type_offsets[ty] as u32)..(type_offsets[ty + 1] as u32);
        let schedule = (1..=num_blocks + 1 - window)
            .map(|w| ScheduleStep {
                groups: (w..=(w + window).min(num_types)).map(|ty| type_range(ty).collect()).collect(),
            })
            .collect();
        Ok(Self::assemble(
            code,
            LayoutKind::Staircase { num_blocks, window },
            ids,
            type_offsets,
            cw_bits,
            side,
            num_blocks * m * m,
            schedule,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        code: Arc<BchCode>,
        kind: LayoutKind,
        ids: Vec<CodewordId>,
        type_offsets: Vec<usize>,
        cw_bits: Vec<u32>,
        side: Vec<u8>,
        num_bits: usize,
        schedule: Vec<ScheduleStep>,
    ) -> Self {
        let n = code.n();
        let mut incidence = vec![[(u32::MAX, 0u16); 2]; num_bits];
        let mut filled = vec![0u8; num_bits];
        for (cw, bits) in cw_bits.chunks_exact(n).enumerate() {
            for (pos, &b) in bits.iter().enumerate() {
                if b != VIRTUAL_BIT {
                    let slot = &mut filled[b as usize];
                    incidence[b as usize][*slot as usize] = (cw as u32, pos as u16);
                    *slot += 1;
                }
            }
        }
        debug_assert!(filled.iter().all(|&f| f == 2), "every bit needs two codewords");
        Self {
            code,
            kind,
            ids,
            type_offsets,
            cw_bits,
            incidence,
            side,
            schedule,
        }
    }

    pub fn code(&self) -> &BchCode {
        &self.code
    }

    pub fn shared_code(&self) -> Arc<BchCode> {
        Arc::clone(&self.code)
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn num_bits(&self) -> usize {
        self.incidence.len()
    }

    pub fn num_codewords(&self) -> usize {
        self.ids.len()
    }

    pub fn num_types(&self) -> usize {
        self.type_offsets.len() - 2
    }

    pub fn schedule(&self) -> &[ScheduleStep] {
        &self.schedule
    }

    pub fn id(&self, cw: usize) -> CodewordId {
        self.ids[cw]
    }

    pub fn ids(&self) -> &[CodewordId] {
        &self.ids
    }

    /// Dense index of a codeword id.
    pub fn index_of(&self, id: CodewordId) -> Result<usize> {
        let ty = id.ty as usize;
        if ty == 0 || ty > self.num_types() {
            return Err(Error::Parameter(format!("unknown codeword type in {id}")));
        }
        let idx = self.type_offsets[ty] + id.index as usize;
        if idx >= self.type_offsets[ty + 1] {
            return Err(Error::Parameter(format!("codeword index out of range in {id}")));
        }
        Ok(idx)
    }

    /// Bipartition class of a codeword; the two codewords of any bit differ.
    #[inline]
    pub fn side(&self, cw: usize) -> u8 {
        self.side[cw]
    }

    /// Bits of a codeword in position order, [`VIRTUAL_BIT`] for known zeros.
    #[inline]
    pub fn cw_bits(&self, cw: usize) -> &[u32] {
        let n = self.code.n();
        &self.cw_bits[cw * n..(cw + 1) * n]
    }

    #[inline]
    pub fn incidence(&self, bit: usize) -> [(u32, u16); 2] {
        self.incidence[bit]
    }

    /// The codeword sharing `bit` with `cw`.
    #[inline]
    pub fn other_codeword(&self, bit: usize, cw: usize) -> usize {
        let [a, b] = self.incidence[bit];
        if a.0 as usize == cw {
            b.0 as usize
        } else {
            a.0 as usize
        }
    }

    pub fn incident_codewords(&self, bit: usize) -> Result<(CodewordId, CodewordId)> {
        let [a, b] = *self
            .incidence
            .get(bit)
            .ok_or_else(|| Error::Parameter(format!("bit {bit} out of range")))?;
        Ok((self.ids[a.0 as usize], self.ids[b.0 as usize]))
    }

    /// Bits of a codeword in position order; `None` marks known-zero positions.
    pub fn bits_of(&self, id: CodewordId) -> Result<Vec<Option<usize>>> {
        let cw = self.index_of(id)?;
        Ok(self
            .cw_bits(cw)
            .iter()
            .map(|&b| (b != VIRTUAL_BIT).then_some(b as usize))
            .collect())
    }

    /// Product-code bit at row `r`, column `c`.
    pub fn product_bit(&self, r: usize, c: usize) -> usize {
        debug_assert_eq!(self.kind, LayoutKind::Product);
        r * self.code.n() + c
    }

    /// Staircase block (1-based) holding a bit, or 1 for product codes.
    pub fn block_of(&self, bit: usize) -> usize {
        match self.kind {
            LayoutKind::Product => 1,
            LayoutKind::Staircase { .. } => {
                let m = self.code.n() / 2;
                bit / (m * m) + 1
            }
        }
    }

    /// Number of transmitted blocks (1 for product codes).
    pub fn num_blocks(&self) -> usize {
        match self.kind {
            LayoutKind::Product => 1,
            LayoutKind::Staircase { num_blocks, .. } => num_blocks,
        }
    }
}

/// Encodes a `k × k` message array (row-major) into a product codeword.
pub fn encode_product(code: &BchCode, message: &[u8]) -> Result<Vec<u8>> {
    let (n, k) = (code.n(), code.k());
    if message.len() != k * k {
        return Err(Error::Parameter(format!("product message needs {} bits", k * k)));
    }
    let msg_pos = code.message_positions();
    let mut array = vec![0u8; n * n];
    let mut rows = Vec::with_capacity(k);
    for r in 0..k {
        rows.push(code.encode(&message[r * k..(r + 1) * k])?);
    }
    // Rows carrying information occupy the message positions of every column.
    for (i, row) in rows.iter().enumerate() {
        let r = msg_pos.start + i;
        array[r * n..(r + 1) * n].copy_from_slice(row);
    }
    for c in 0..n {
        let msg: Vec<u8> = msg_pos.clone().map(|r| array[r * n + c]).collect();
        let col = code.encode(&msg)?;
        for (r, &b) in col.iter().enumerate() {
            array[r * n + c] = b;
        }
    }
    Ok(array)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(nu: u32, t: usize, e: usize, s: usize) -> Arc<BchCode> {
        Arc::new(BchCode::new(nu, t, e, s).unwrap())
    }

    #[test]
    fn product_layout_shape() {
        let layout = GpcLayout::product(code(4, 2, 0, 0));
        assert_eq!(layout.num_bits(), 225);
        assert_eq!(layout.num_codewords(), 30);
        assert_eq!(layout.num_types(), 2);
        let bit = layout.product_bit(4, 13);
        assert_eq!(
            layout.incident_codewords(bit).unwrap(),
            (CodewordId::new(1, 4), CodewordId::new(2, 13))
        );
        assert_eq!(layout.schedule().len(), 1);
        assert_eq!(layout.schedule()[0].groups.len(), 2);
    }

    #[test]
    fn rows_and_columns_share_one_bit() {
        let layout = GpcLayout::product(code(4, 2, 0, 0));
        for r in 0..15 {
            let rb = layout.bits_of(CodewordId::new(1, r)).unwrap();
            assert_eq!(rb.len(), 15);
            for c in 0..15 {
                let cb = layout.bits_of(CodewordId::new(2, c)).unwrap();
                let shared = rb.iter().filter(|b| cb.contains(b)).count();
                assert_eq!(shared, 1);
            }
        }
    }

    fn check_round_trip(layout: &GpcLayout) {
        let mut degree = vec![0; layout.num_bits()];
        for cw in 0..layout.num_codewords() {
            let id = layout.id(cw);
            for b in layout.bits_of(id).unwrap().into_iter().flatten() {
                degree[b] += 1;
                let (x, y) = layout.incident_codewords(b).unwrap();
                assert!(x == id || y == id);
                assert_ne!(layout.side(layout.index_of(x).unwrap()), layout.side(layout.index_of(y).unwrap()));
            }
        }
        assert!(degree.iter().all(|&d| d == 2));
        for b in 0..layout.num_bits() {
            let (x, y) = layout.incident_codewords(b).unwrap();
            assert_ne!(x, y);
            for id in [x, y] {
                assert!(layout.bits_of(id).unwrap().contains(&Some(b)));
            }
        }
    }

    #[test]
    fn product_round_trip() {
        check_round_trip(&GpcLayout::product(code(4, 2, 0, 0)));
        check_round_trip(&GpcLayout::product(code(5, 2, 1, 3)));
    }

    #[test]
    fn staircase_round_trip_and_virtual_blocks() {
        let layout = GpcLayout::staircase(code(4, 2, 1, 0), 5, 3).unwrap();
        check_round_trip(&layout);
        assert_eq!(layout.num_bits(), 5 * 64);
        assert_eq!(layout.num_types(), 6);
        // First type: half its positions come from the virtual block B_0.
        let first = layout.bits_of(CodewordId::new(1, 0)).unwrap();
        assert!(first[..8].iter().all(Option::is_none));
        assert!(first[8..].iter().all(Option::is_some));
        let last = layout.bits_of(CodewordId::new(6, 0)).unwrap();
        assert!(last[8..].iter().all(Option::is_none));
        assert_eq!(layout.schedule().len(), 3);
        assert_eq!(layout.schedule()[0].groups.len(), 4);
    }

    #[test]
    fn staircase_full_window_is_single_step() {
        let layout = GpcLayout::staircase(code(4, 2, 1, 0), 2, 2).unwrap();
        assert_eq!(layout.schedule().len(), 1);
        assert_eq!(layout.schedule()[0].groups.len(), layout.num_types());
    }

    #[test]
    fn staircase_parameter_errors() {
        assert!(GpcLayout::staircase(code(4, 2, 0, 0), 4, 2).is_err()); // n = 15 odd
        assert!(GpcLayout::staircase(code(4, 2, 1, 0), 2, 3).is_err());
        assert!(GpcLayout::staircase(code(4, 2, 1, 0), 3, 1).is_err());
    }

    #[test]
    fn unknown_ids_rejected() {
        let layout = GpcLayout::product(code(4, 2, 0, 0));
        assert!(layout.bits_of(CodewordId::new(3, 0)).is_err());
        assert!(layout.bits_of(CodewordId::new(1, 15)).is_err());
        assert!(layout.incident_codewords(225).is_err());
    }

    #[test]
    fn product_encoding_has_zero_syndromes() {
        let c = code(4, 2, 1, 0);
        let layout = GpcLayout::product(Arc::clone(&c));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let msg: Vec<u8> = (0..c.k() * c.k()).map(|_| rng.random_range(0..2)).collect();
            let frame = encode_product(&c, &msg).unwrap();
            for cw in 0..layout.num_codewords() {
                let word: Vec<u8> = layout.cw_bits(cw).iter().map(|&b| frame[b as usize]).collect();
                assert!(c.syndrome(&word).unwrap().is_zero());
            }
        }
    }
}
