//! Nilsimsa locality-sensitive hash.
//!
//! Faithful to the reference implementation: a 5-byte sliding window feeds
//! eight trigram combinations per input byte into 256 accumulator buckets via
//! the fixed tran53 permutation; digest bit `i` is set iff accumulator `i`
//! strictly exceeds the expected mean count. The canonical hex form reverses
//! the byte order, matching the published convention.

/// The tran53 permutation table, embedded verbatim from the reference
/// implementation. Guarded by a checksum test below.
const TRAN: [u8; 256] = [
    0x02, 0xd6, 0x9e, 0x6f, 0xf9, 0x1d, 0x04, 0xab, 0xd0, 0x22, 0x16, 0x1f, 0xd8, 0x73, 0xa1, 0xac,
    0x3b, 0x70, 0x62, 0x96, 0x1e, 0x6e, 0x8f, 0x39, 0x9d, 0x05, 0x14, 0x4a, 0xa6, 0xbe, 0xae, 0x0e,
    0xcf, 0xb9, 0x9c, 0x9a, 0xc7, 0x68, 0x13, 0xe1, 0x2d, 0xa4, 0xeb, 0x51, 0x8d, 0x64, 0x6b, 0x50,
    0x23, 0x80, 0x03, 0x41, 0xec, 0xbb, 0x71, 0xcc, 0x7a, 0x86, 0x7f, 0x98, 0xf2, 0x36, 0x5e, 0xee,
    0x8e, 0xce, 0x4f, 0xb8, 0x32, 0xb6, 0x5f, 0x59, 0xdc, 0x1b, 0x31, 0x4c, 0x7b, 0xf0, 0x63, 0x01,
    0x6c, 0xba, 0x07, 0xe8, 0x12, 0x77, 0x49, 0x3c, 0xda, 0x46, 0xfe, 0x2f, 0x79, 0x1c, 0x9b, 0x30,
    0xe3, 0x00, 0x06, 0x7e, 0x2e, 0x0f, 0x38, 0x33, 0x21, 0xad, 0xa5, 0x54, 0xca, 0xa7, 0x29, 0xfc,
    0x5a, 0x47, 0x69, 0x7d, 0xc5, 0x95, 0xb5, 0xf4, 0x0b, 0x90, 0xa3, 0x81, 0x6d, 0x25, 0x55, 0x35,
    0xf5, 0x75, 0x74, 0x0a, 0x26, 0xbf, 0x19, 0x5c, 0x1a, 0xc6, 0xff, 0x99, 0x5d, 0x84, 0xaa, 0x66,
    0x3e, 0xaf, 0x78, 0xb3, 0x20, 0x43, 0xc1, 0xed, 0x24, 0xea, 0xe6, 0x3f, 0x18, 0xf3, 0xa0, 0x42,
    0x57, 0x08, 0x53, 0x60, 0xc3, 0xc0, 0x83, 0x40, 0x82, 0xd7, 0x09, 0xbd, 0x44, 0x2a, 0x67, 0xa8,
    0x93, 0xe0, 0xc2, 0x56, 0x9f, 0xd9, 0xdd, 0x85, 0x15, 0xb4, 0x8a, 0x27, 0x28, 0x92, 0x76, 0xde,
    0xef, 0xf8, 0xb2, 0xb7, 0xc9, 0x3d, 0x45, 0x94, 0x4b, 0x11, 0x0d, 0x65, 0xd5, 0x34, 0x8b, 0x91,
    0x0c, 0xfa, 0x87, 0xe9, 0x7c, 0x5b, 0xb1, 0x4d, 0xe5, 0xd4, 0xcb, 0x10, 0xa2, 0x17, 0x89, 0xbc,
    0xdb, 0xb0, 0xe2, 0x97, 0x88, 0x52, 0xf7, 0x48, 0xd3, 0x61, 0x2c, 0x3a, 0x2b, 0xd1, 0x8c, 0xfb,
    0xf1, 0xcd, 0xe4, 0x6a, 0xe7, 0xa9, 0xfd, 0xc4, 0x37, 0xc8, 0xd2, 0xf6, 0xdf, 0x58, 0x72, 0x4e,
];

/// A 256-bit Nilsimsa digest. Bytes are kept in accumulator order; the hex
/// form reverses them per the reference convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NilsimsaDigest {
    bytes: [u8; 32],
}

impl NilsimsaDigest {
    pub const ZERO: NilsimsaDigest = NilsimsaDigest { bytes: [0; 32] };

    /// Canonical form: 64 lowercase hex chars, byte 31 first.
    pub fn to_hex(self) -> String {
        const HEX: &[u8; 16] = b"0123456789abcdef";
        let mut out = String::with_capacity(64);
        for &b in self.bytes.iter().rev() {
            out.push(HEX[(b >> 4) as usize] as char);
            out.push(HEX[(b & 0x0f) as usize] as char);
        }
        out
    }

    pub fn popcount(self) -> u32 {
        self.bytes.iter().map(|b| b.count_ones()).sum()
    }
}

#[inline]
fn tran3(a: u8, b: u8, c: u8, n: u8) -> u8 {
    let mul = (TRAN[b as usize] as u32) * (2 * n as u32 + 1);
    let x = (TRAN[a.wrapping_add(n) as usize] as u32) ^ mul;
    ((x + TRAN[(c ^ TRAN[n as usize]) as usize] as u32) & 0xff) as u8
}

/// Digest of a byte string. Inputs shorter than three bytes have no trigrams
/// and hash to all zeros.
pub fn nilsimsa_digest(input: &[u8]) -> NilsimsaDigest {
    let mut acc = [0u32; 256];
    // window[0] is the previous byte, window[3] the oldest of the last four.
    let mut window = [0u8; 4];
    let mut seen = 0usize;
    for &ch in input {
        if seen > 1 {
            acc[tran3(ch, window[0], window[1], 0) as usize] += 1;
        }
        if seen > 2 {
            acc[tran3(ch, window[0], window[2], 1) as usize] += 1;
            acc[tran3(ch, window[1], window[2], 2) as usize] += 1;
        }
        if seen > 3 {
            acc[tran3(ch, window[0], window[3], 3) as usize] += 1;
            acc[tran3(ch, window[1], window[3], 4) as usize] += 1;
            acc[tran3(ch, window[2], window[3], 5) as usize] += 1;
            acc[tran3(window[3], window[0], ch, 6) as usize] += 1;
            acc[tran3(window[3], window[2], ch, 7) as usize] += 1;
        }
        window = [ch, window[0], window[1], window[2]];
        seen += 1;
    }
    let total: usize = match seen {
        0..=2 => 0,
        3 => 1,
        4 => 4,
        n => 8 * n - 28,
    };
    let threshold = (total / 256) as u32;
    let mut bytes = [0u8; 32];
    for (i, &count) in acc.iter().enumerate() {
        if count > threshold {
            bytes[i >> 3] |= 1 << (i & 7);
        }
    }
    NilsimsaDigest { bytes }
}

/// Nilsimsa similarity convention: number of agreeing bit positions minus 128.
/// 128 means identical digests, -128 bitwise complements.
pub fn hamming_similarity(a: NilsimsaDigest, b: NilsimsaDigest) -> i32 {
    let differing: u32 = a
        .bytes
        .iter()
        .zip(b.bytes.iter())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum();
    128 - differing as i32
}
