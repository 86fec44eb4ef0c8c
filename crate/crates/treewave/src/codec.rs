//! Dead-zone scalar quantization and adaptive arithmetic coding of detail
//! streams, plus per-node payload accounting.
//!
//! Detail coefficients are quantized with a dead-zone uniform quantizer and
//! entropy coded with an adaptive order-0 arithmetic coder (add-one frequency
//! updates). The coded stream carries a 48-bit header: the alphabet bounds as
//! two signed 16-bit values and the symbol count as an unsigned 16-bit value.
//! Raw measurements and smooth coefficients bypass the coder entirely; they
//! always cost the full raw bit budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NodeId;
use crate::transform::CoeffClass;

/// Bits spent on the (min, max, count) stream header.
pub const HEADER_BITS: u64 = 48;

/// Dead-zone uniform quantizer: `q = sign(v) * floor(|v| / step)`. The zero
/// bin is twice as wide as the others.
pub fn quantize(values: &[f64], step: f64) -> Result<Vec<i32>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quantizer step must be positive, got {step}"
        )));
    }
    Ok(values
        .iter()
        .map(|&v| (v.signum() * (v.abs() / step).floor()) as i32)
        .collect())
}

/// Midpoint reconstruction: `sign(q) * (|q| + 1/2) * step`, zero for the dead
/// zone. The error never exceeds one step.
pub fn dequantize(indices: &[i32], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quantizer step must be positive, got {step}"
        )));
    }
    Ok(indices
        .iter()
        .map(|&q| {
            if q == 0 {
                0.0
            } else {
                (q.signum() as f64) * (q.unsigned_abs() as f64 + 0.5) * step
            }
        })
        .collect())
}

/// Bit string in big-endian bit order (first bit = MSB of byte 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bitstring {
    bytes: Vec<u8>,
    len_bits: u64,
}

impl Bitstring {
    pub fn new() -> Bitstring {
        Bitstring {
            bytes: Vec::new(),
            len_bits: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        let byte = (self.len_bits / 8) as usize;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len_bits % 8);
        }
        self.len_bits += 1;
    }

    pub fn get(&self, i: u64) -> Option<bool> {
        if i >= self.len_bits {
            return None;
        }
        Some(self.bytes[(i / 8) as usize] & (0x80 >> (i % 8)) != 0)
    }

    pub fn len_bits(&self) -> u64 {
        self.len_bits
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn push_u16(&mut self, v: u16) {
        for k in (0..16).rev() {
            self.push(v >> k & 1 == 1);
        }
    }
}

impl Default for Bitstring {
    fn default() -> Self {
        Bitstring::new()
    }
}

/// Cursor over a bitstring that yields zeros past the end, as the arithmetic
/// decoder expects.
struct BitReader<'a> {
    bits: &'a Bitstring,
    pos: u64,
}

impl BitReader<'_> {
    fn next(&mut self) -> u64 {
        let b = self.bits.get(self.pos).unwrap_or(false);
        self.pos += 1;
        u64::from(b)
    }

    fn read_u16(&mut self) -> u16 {
        let mut v = 0u16;
        for _ in 0..16 {
            v = (v << 1) | self.next() as u16;
        }
        v
    }
}

/// Adaptive frequency model: every symbol starts at count one and gains one
/// per occurrence. Totals stay below 2^17, comfortably inside the coder's
/// precision, so no rescaling is ever needed.
struct AdaptiveModel {
    fenwick: Vec<u64>,
    size: usize,
    total: u64,
}

impl AdaptiveModel {
    fn new(size: usize) -> AdaptiveModel {
        let mut m = AdaptiveModel {
            fenwick: vec![0; size + 1],
            size,
            total: 0,
        };
        for i in 0..size {
            m.add(i, 1);
        }
        m
    }

    fn add(&mut self, idx: usize, amount: u64) {
        let mut i = idx + 1;
        while i <= self.size {
            self.fenwick[i] += amount;
            i += i & i.wrapping_neg();
        }
        self.total += amount;
    }

    /// Cumulative count of symbols strictly below `idx`.
    fn cum_below(&self, idx: usize) -> u64 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.fenwick[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Largest symbol whose cumulative-below is <= target; returns the symbol
    /// containing the target offset.
    fn find(&self, target: u64) -> usize {
        let mut pos = 0usize;
        let mut rem = target;
        let mut mask = self.size.next_power_of_two();
        while mask > 0 {
            let next = pos + mask;
            if next <= self.size && self.fenwick[next] <= rem {
                rem -= self.fenwick[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(self.size - 1)
    }
}

const CODE_BITS: u32 = 32;
const TOP: u64 = 1 << CODE_BITS;
const HALF: u64 = TOP / 2;
const QUARTER: u64 = TOP / 4;
const THREE_QUARTERS: u64 = 3 * TOP / 4;

fn check_symbols(symbols: &[i32]) -> Result<(i16, i16)> {
    if symbols.is_empty() {
        return Err(Error::InvalidArgument("cannot code an empty stream".into()));
    }
    if symbols.len() > u16::MAX as usize {
        return Err(Error::Range(format!(
            "stream of {} symbols exceeds the 16-bit count header",
            symbols.len()
        )));
    }
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for &s in symbols {
        if s < i16::MIN as i32 || s > i16::MAX as i32 {
            return Err(Error::Range(format!(
                "symbol {s} outside the signed 16-bit range"
            )));
        }
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo as i16, hi as i16))
}

/// Encode a symbol stream with the adaptive model. The header declares the
/// alphabet `[min, max]` and the symbol count.
pub fn ac_encode(symbols: &[i32]) -> Result<Bitstring> {
    let (min, max) = check_symbols(symbols)?;
    let mut out = Bitstring::new();
    out.push_u16(min as u16);
    out.push_u16(max as u16);
    out.push_u16(symbols.len() as u16);

    let size = (max as i32 - min as i32 + 1) as usize;
    let mut model = AdaptiveModel::new(size);
    let mut low: u64 = 0;
    let mut high: u64 = TOP - 1;
    let mut pending: u64 = 0;

    let emit = |out: &mut Bitstring, bit: bool, pending: &mut u64| {
        out.push(bit);
        while *pending > 0 {
            out.push(!bit);
            *pending -= 1;
        }
    };

    for &s in symbols {
        let idx = (s - min as i32) as usize;
        let total = model.total;
        let cum_lo = model.cum_below(idx);
        let cum_hi = cum_lo + (model.cum_below(idx + 1) - cum_lo);
        let range = high - low + 1;
        high = low + range * cum_hi / total - 1;
        low += range * cum_lo / total;
        loop {
            if high < HALF {
                emit(&mut out, false, &mut pending);
            } else if low >= HALF {
                emit(&mut out, true, &mut pending);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                pending += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        model.add(idx, 1);
    }
    pending += 1;
    if low < QUARTER {
        emit(&mut out, false, &mut pending);
    } else {
        emit(&mut out, true, &mut pending);
    }
    Ok(out)
}

/// Decode a stream produced by [`ac_encode`]. The count comes from the
/// header.
pub fn ac_decode(bits: &Bitstring) -> Result<Vec<i32>> {
    if bits.len_bits() < HEADER_BITS {
        return Err(Error::Range("stream shorter than its header".into()));
    }
    let mut reader = BitReader { bits, pos: 0 };
    let min = reader.read_u16() as i16 as i32;
    let max = reader.read_u16() as i16 as i32;
    let count = reader.read_u16() as usize;
    if max < min {
        return Err(Error::Range(format!(
            "corrupt header: max {max} < min {min}"
        )));
    }

    let size = (max - min + 1) as usize;
    let mut model = AdaptiveModel::new(size);
    let mut low: u64 = 0;
    let mut high: u64 = TOP - 1;
    let mut value: u64 = 0;
    for _ in 0..CODE_BITS {
        value = (value << 1) | reader.next();
    }

    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let total = model.total;
        let range = high - low + 1;
        let target = ((value - low + 1) * total - 1) / range;
        let idx = model.find(target);
        let cum_lo = model.cum_below(idx);
        let cum_hi = model.cum_below(idx + 1);
        high = low + range * cum_hi / total - 1;
        low += range * cum_lo / total;
        loop {
            if high < HALF {
                // nothing
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | reader.next();
        }
        out.push(min + idx as i32);
        model.add(idx, 1);
    }
    Ok(out)
}

/// What one node's stream costs on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    RawBits,
    SmoothBits,
    DetailCoded,
}

#[derive(Debug, Clone)]
pub struct Payload {
    pub node: NodeId,
    pub bits: u64,
    pub kind: PayloadKind,
}

/// Bits for one node's epoch stream: raw and smooth streams cost
/// `measurements * raw_bits`; detail streams cost their coded length.
pub fn payload_bits(
    node: NodeId,
    class: CoeffClass,
    coded: Option<&Bitstring>,
    measurements: usize,
    raw_bits: u32,
) -> Result<Payload> {
    match class {
        CoeffClass::Raw => Ok(Payload {
            node,
            bits: measurements as u64 * raw_bits as u64,
            kind: PayloadKind::RawBits,
        }),
        CoeffClass::Smooth(_) => Ok(Payload {
            node,
            bits: measurements as u64 * raw_bits as u64,
            kind: PayloadKind::SmoothBits,
        }),
        CoeffClass::Detail(_) => {
            let coded = coded.ok_or_else(|| {
                Error::Accounting(format!(
                    "node {node} is a detail stream but has no coded bits"
                ))
            })?;
            Ok(Payload {
                node,
                bits: coded.len_bits(),
                kind: PayloadKind::DetailCoded,
            })
        }
    }
}

/// Empirical Shannon entropy in bits per symbol.
pub fn empirical_entropy(symbols: &[i32]) -> f64 {
    use std::collections::BTreeMap;
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    for &s in symbols {
        *counts.entry(s).or_insert(0) += 1;
    }
    let n = symbols.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
