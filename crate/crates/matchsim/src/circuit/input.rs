use crate::error::{Error, Result};
use crate::linalg::*;

/// Parse-time cap on entangled block width.
pub const MAX_ENTANGLED_WIDTH: usize = 20;
const NORM_TOL: f64 = 1e-12;

/// One input block. Inside a block amplitude vector the block's first line is
/// the most significant bit of the index.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Bits(Vec<u8>),
    Product(Vec<[C64; 2]>),
    Entangled { k: usize, amps: Vec<C64> },
    /// |Φ+>_{13} |Φ+>_{24}
    Magic,
}

impl Block {
    pub fn width(&self) -> usize {
        match self {
            Block::Bits(b) => b.len(),
            Block::Product(s) => s.len(),
            Block::Entangled { k, .. } => *k,
            Block::Magic => 4,
        }
    }

    /// Dense amplitudes for entangled-type blocks (`Entangled`, `Magic`).
    pub fn entangled_amplitudes(&self) -> Option<Vec<C64>> {
        match self {
            Block::Entangled { amps, .. } => Some(amps.clone()),
            Block::Magic => Some(magic_amplitudes()),
            _ => None,
        }
    }

    /// All nonzero amplitudes sit on one Hamming-weight parity.
    pub fn is_fermionic(&self) -> bool {
        match self {
            Block::Bits(_) => true,
            Block::Product(states) => states.iter().all(|s| s[0].norm() < NORM_TOL || s[1].norm() < NORM_TOL),
            _ => {
                let amps = self.entangled_amplitudes().unwrap();
                let mut seen = [false; 2];
                for (i, a) in amps.iter().enumerate() {
                    if a.norm() > NORM_TOL {
                        seen[(i.count_ones() % 2) as usize] = true;
                    }
                }
                !(seen[0] && seen[1])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Block::Bits(b) => {
                if b.iter().any(|&x| x > 1) {
                    return Err(Error::validation("bits", "bit values must be 0 or 1"));
                }
            }
            Block::Product(states) => {
                for s in states {
                    check_norm(s)?;
                }
            }
            Block::Entangled { k, amps } => {
                if *k == 0 || *k > MAX_ENTANGLED_WIDTH {
                    return Err(Error::validation(
                        "entangled-width",
                        format!("k = {k} outside 1..={MAX_ENTANGLED_WIDTH}"),
                    ));
                }
                if amps.len() != 1usize << k {
                    return Err(Error::validation("entangled-width", format!("expected {} amplitudes", 1usize << k)));
                }
                check_norm(amps)?;
            }
            Block::Magic => {}
        }
        if self.width() == 0 {
            return Err(Error::validation("block-width", "empty block"));
        }
        Ok(())
    }
}

fn check_norm(v: &[C64]) -> Result<()> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::validation("finite", "amplitudes must be finite"));
    }
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if (n2.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::validation("unit-norm", format!("amplitude norm {}", n2.sqrt())));
    }
    Ok(())
}

pub fn magic_amplitudes() -> Vec<C64> {
    let mut v = vec![ZERO; 16];
    for idx in [0b0000, 0b0101, 0b1010, 0b1111] {
        v[idx] = c(0.5, 0.0);
    }
    v
}

/// Ordered list of blocks covering lines `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    blocks: Vec<Block>,
}

impl InputSpec {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        for b in &blocks {
            b.validate()?;
        }
        if blocks.is_empty() {
            return Err(Error::validation("block-width", "input has no blocks"));
        }
        Ok(InputSpec { blocks })
    }

    pub fn bits(bits: &[u8]) -> Self {
        InputSpec::new(vec![Block::Bits(bits.to_vec())]).expect("valid bits")
    }

    pub fn zeros(n: usize) -> Self {
        InputSpec::bits(&vec![0; n])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Block::width).sum()
    }

    /// First line of every block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = off;
                off += b.width();
                o
            })
            .collect()
    }

    pub fn is_fermionic(&self) -> bool {
        self.blocks.iter().all(Block::is_fermionic)
    }

    pub fn is_bits(&self) -> bool {
        self.blocks.iter().all(|b| matches!(b, Block::Bits(_)))
    }

    pub fn magic_count(&self) -> usize {
        self.blocks.iter().filter(|b| matches!(b, Block::Magic)).count()
    }

    pub fn max_entangled_width(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b, Block::Entangled { .. } | Block::Magic))
            .map(Block::width)
            .max()
            .unwrap_or(0)
    }

    /// Appends blocks below the existing lines.
    pub fn with_appended(&self, extra: Vec<Block>) -> Result<InputSpec> {
        let mut blocks = self.blocks.clone();
        blocks.extend(extra);
        InputSpec::new(blocks)
    }

    /// Computational-basis support: `(bits, amplitude)` with line `k` at bit `k`,
    /// nonzero amplitudes only. Errors if the support exceeds `cap` entries.
    pub fn basis_expansion(&self, cap: usize) -> Result<Vec<(u64, C64)>> {
        let mut terms: Vec<(u64, C64)> = vec![(0, ONE)];
        let offsets = self.offsets();
        let push = |terms: Vec<(u64, C64)>, local: Vec<(u64, C64)>| -> Result<Vec<(u64, C64)>> {
            if terms.len() * local.len() > cap {
                return Err(Error::CapExceeded(format!(
                    "input support {} exceeds cap {cap}",
                    terms.len() * local.len()
                )));
            }
            let mut out = Vec::with_capacity(terms.len() * local.len());
            for (bits, amp) in &terms {
                for (lb, la) in &local {
                    out.push((bits | lb, amp * la));
                }
            }
            Ok(out)
        };
        for (block, &off) in self.blocks.iter().zip(&offsets) {
            match block {
                Block::Bits(b) => {
                    let mask = b.iter().enumerate().filter(|(_, &x)| x == 1).fold(0u64, |m, (i, _)| m | 1 << (off + i));
                    for t in &mut terms {
                        t.0 |= mask;
                    }
                }
                Block::Product(states) => {
                    for (i, s) in states.iter().enumerate() {
                        let local: Vec<(u64, C64)> = [(0u64, s[0]), (1u64 << (off + i), s[1])]
                            .into_iter()
                            .filter(|(_, a)| a.norm() > 0.0)
                            .collect();
                        terms = push(terms, local)?;
                    }
                }
                _ => {
                    let k = block.width();
                    let amps = block.entangled_amplitudes().unwrap();
                    let local: Vec<(u64, C64)> = amps
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() > 0.0)
                        .map(|(idx, a)| (block_index_to_mask(idx, k) << off, *a))
                        .collect();
                    terms = push(terms, local)?;
                }
            }
        }
        Ok(terms)
    }
}

/// Converts a block amplitude index (first line = MSB) into a line mask
/// (first line = bit 0).
pub fn block_index_to_mask(idx: usize, k: usize) -> u64 {
    let mut m = 0u64;
    for j in 0..k {
        if idx >> (k - 1 - j) & 1 == 1 {
            m |= 1 << j;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_is_even_and_fermionic() {
        let amps = magic_amplitudes();
        for (i, a) in amps.iter().enumerate() {
            if a.norm() > 0.0 {
                assert_eq!(i.count_ones() % 2, 0);
            }
        }
        assert!(Block::Magic.is_fermionic());
        assert!((norm(&amps) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn magic_pairs_lines_one_three_and_two_four() {
        // |Φ+>_{13}: bits of lines 1 and 3 agree, likewise 2 and 4.
        for (i, a) in magic_amplitudes().iter().enumerate() {
            let bit = |line: usize| (i >> (3 - line)) & 1;
            if a.norm() > 0.0 {
                assert_eq!(bit(0), bit(2));
                assert_eq!(bit(1), bit(3));
            }
        }
    }

    #[test]
    fn rejects_unnormalised() {
        let r = InputSpec::new(vec![Block::Product(vec![[ONE, ONE]])]);
        assert!(matches!(r, Err(Error::Validation { invariant: "unit-norm", .. })));
    }

    #[test]
    fn expansion_orders_lines_by_bit() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = InputSpec::new(vec![
            Block::Bits(vec![1, 0]),
            Block::Product(vec![[c(s, 0.0), c(s, 0.0)]]),
        ])
        .unwrap();
        let terms = spec.basis_expansion(16).unwrap();
        let masks: Vec<u64> = terms.iter().map(|t| t.0).collect();
        assert_eq!(masks, vec![0b001, 0b101]);
        assert_eq!(spec.n(), 3);
    }

    #[test]
    fn expansion_respects_cap() {
        let spec = InputSpec::new(vec![Block::Magic, Block::Magic]).unwrap();
        assert!(spec.basis_expansion(16).is_ok());
        assert!(matches!(spec.basis_expansion(15), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn block_index_conversion() {
        assert_eq!(block_index_to_mask(0b100, 3), 0b001);
        assert_eq!(block_index_to_mask(0b011, 3), 0b110);
    }
}
