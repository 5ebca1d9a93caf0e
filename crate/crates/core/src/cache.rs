//! Set-associative cache array: address decomposition, tag lookup, line
//! state, and SRRIP victim selection that respects per-way block masks.

use crate::config::CacheConfig;

/// 2-bit re-reference prediction value bounds (SRRIP-HP constants).
pub const RRPV_MAX: u8 = 3;
/// Insertion RRPV for a freshly filled line (long re-reference prediction).
pub const RRPV_INSERT: u8 = 2;

/// A set of way indices, one bit per way. Supports up to 64 ways.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WayMask(u64);

impl WayMask {
    pub const EMPTY: WayMask = WayMask(0);

    pub fn contains(self, way: usize) -> bool {
        self.0 & (1u64 << way) != 0
    }

    pub fn insert(&mut self, way: usize) {
        self.0 |= 1u64 << way;
    }

    pub fn remove(&mut self, way: usize) {
        self.0 &= !(1u64 << way);
    }

    pub fn with(self, way: usize) -> WayMask {
        WayMask(self.0 | (1u64 << way))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True when all of the first `num_ways` ways are set.
    pub fn is_full(self, num_ways: usize) -> bool {
        self.0 == Self::all(num_ways).0
    }

    pub fn all(num_ways: usize) -> WayMask {
        debug_assert!((1..=64).contains(&num_ways));
        if num_ways == 64 {
            WayMask(u64::MAX)
        } else {
            WayMask((1u64 << num_ways) - 1)
        }
    }

    pub fn iter(self, num_ways: usize) -> impl Iterator<Item = usize> {
        (0..num_ways).filter(move |&w| self.contains(w))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> WayMask {
        WayMask(bits)
    }
}

/// Metadata for one cache line (one way of one set).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LineState {
    pub valid: bool,
    pub tag: u64,
    /// Re-reference prediction value, always in `[0, RRPV_MAX]`.
    pub rrpv: u8,
    /// Instruction pointer of the most recent wear event to this cell.
    /// Meaningful only once the cell has received at least one wear event.
    pub last_writer_ip: u64,
    /// Way is excluded from receiving writes this interval.
    pub blocked: bool,
}

impl LineState {
    /// SRRIP hit promotion: the line is predicted near-immediate re-reference.
    pub fn on_hit(&mut self) {
        self.rrpv = 0;
    }

    /// Install `tag` in this line after a fill. The blocked flag is policy
    /// state and is left untouched.
    pub fn fill(&mut self, tag: u64, ip: u64) {
        self.valid = true;
        self.tag = tag;
        self.rrpv = RRPV_INSERT;
        self.last_writer_ip = ip;
    }

    pub fn invalidate(&mut self) {
        self.valid = false;
    }
}

/// Tag and set index decomposed from a byte address.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AddressParts {
    pub tag: u64,
    pub set_index: usize,
}

/// Split a byte address into tag and set index.
pub fn decode_address(addr: u64, cfg: &CacheConfig) -> AddressParts {
    let block = addr >> cfg.block_offset_bits();
    AddressParts {
        tag: block >> cfg.set_index_bits(),
        set_index: (block & (cfg.num_sets as u64 - 1)) as usize,
    }
}

/// Rebuild the block-aligned byte address from its parts.
pub fn recompose_address(parts: AddressParts, cfg: &CacheConfig) -> u64 {
    ((parts.tag << cfg.set_index_bits()) | parts.set_index as u64) << cfg.block_offset_bits()
}

/// Find the way holding `tag`, if any. Blocking is not consulted here:
/// read hits to blocked ways must still hit, so blocking semantics live in
/// the engine.
///
/// Panics if two valid ways carry the same tag; that state is unreachable
/// through the engine and indicates a bug.
pub fn lookup(set: &[LineState], tag: u64) -> Option<usize> {
    let mut found = None;
    for (way, line) in set.iter().enumerate() {
        if line.valid && line.tag == tag {
            assert!(
                found.is_none(),
                "corrupted set: duplicate valid tag {tag:#x} in ways {} and {way}",
                found.unwrap()
            );
            found = Some(way);
        }
    }
    found
}

/// Select a victim way for a fill, honoring `blocked_mask`.
///
/// Ways in the mask are excluded from the candidate pool; if every way is
/// masked the mask is ignored entirely so that the set can still accept
/// writes. Among candidates the lowest-indexed invalid way wins, then the
/// lowest-indexed way with RRPV 3; otherwise all candidate RRPVs age by one
/// (saturating) and the search repeats. Masked ways are never aged.
pub fn srrip_victim(set: &mut [LineState], blocked_mask: WayMask) -> usize {
    let num_ways = set.len();
    let mask = if blocked_mask.is_full(num_ways) {
        WayMask::EMPTY
    } else {
        blocked_mask
    };

    let candidate = |w: usize| !mask.contains(w);

    if let Some(w) = (0..num_ways).find(|&w| candidate(w) && !set[w].valid) {
        return w;
    }
    // All candidates valid; at most RRPV_MAX aging rounds until one hits 3.
    loop {
        if let Some(w) = (0..num_ways).find(|&w| candidate(w) && set[w].rrpv == RRPV_MAX) {
            return w;
        }
        for (w, line) in set.iter_mut().enumerate() {
            if candidate(w) {
                line.rrpv = (line.rrpv + 1).min(RRPV_MAX);
            }
        }
    }
}
