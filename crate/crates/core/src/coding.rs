//! Systematic MDS erasure code over GF(2⁸).
//!
//! The generator is an `n × k` Vandermonde matrix on the points `0, 1, …, n−1`
//! multiplied on the right by the inverse of its top `k × k` block. Any `k`
//! rows of a Vandermonde matrix on distinct points are invertible, and right
//! multiplication by an invertible matrix preserves that, so any `k` coded
//! chunks recover the message. The top block becomes the identity, which
//! makes chunks `0..k` the plain data chunks.

use thiserror::Error;

/// Primitive polynomial x⁸ + x⁴ + x³ + x² + 1.
const PRIMITIVE_POLY: u16 = 0x11d;

/// Largest `n` supported by the field.
pub const MAX_CHUNKS: usize = 255;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodingError {
    #[error("need 1 ≤ k ≤ n ≤ {MAX_CHUNKS}, got k={k}, n={n}")]
    Params { k: usize, n: usize },
    #[error("message is empty")]
    EmptyMessage,
    #[error("message has {got} bytes, parameters say {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("need {needed} chunks to decode, got {got}")]
    TooFewChunks { needed: usize, got: usize },
    #[error("chunk index {0} appears twice")]
    DuplicateIndex(usize),
    #[error("chunk index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("chunk {index} has {got} bytes, expected {expected}")]
    ChunkLength { index: usize, expected: usize, got: usize },
}

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static GF: Tables = build_tables();

/// Arithmetic in GF(2⁸).
pub mod gf256 {
    use super::GF;

    #[inline]
    pub fn add(a: u8, b: u8) -> u8 {
        a ^ b
    }

    #[inline]
    pub fn mul(a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            GF.exp[GF.log[a as usize] as usize + GF.log[b as usize] as usize]
        }
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse in GF(256)");
        GF.exp[255 - GF.log[a as usize] as usize]
    }

    pub fn pow(a: u8, e: usize) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        GF.exp[(GF.log[a as usize] as usize * e) % 255]
    }
}

/// Row-major square or rectangular matrix over GF(2⁸).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Matrix {
    fn vandermonde(rows: usize, cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(gf256::pow(r as u8, c));
            }
        }
        Self { rows, cols, data }
    }

    fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self { rows: rows.len(), cols: self.cols, data }
    }

    fn mul(&self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = vec![0u8; self.rows * rhs.cols];
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.data[i * self.cols + t];
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[i * rhs.cols + j] ^= gf256::mul(a, rhs.data[t * rhs.cols + j]);
                }
            }
        }
        Matrix { rows: self.rows, cols: rhs.cols, data: out }
    }

    /// Gauss–Jordan inverse; `None` if singular.
    fn inverse(&self) -> Option<Matrix> {
        let n = self.rows;
        debug_assert_eq!(n, self.cols);
        let mut a = self.data.clone();
        let mut inv = vec![0u8; n * n];
        for i in 0..n {
            inv[i * n + i] = 1;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != 0)?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let scale = gf256::inv(a[col * n + col]);
            for j in 0..n {
                a[col * n + j] = gf256::mul(a[col * n + j], scale);
                inv[col * n + j] = gf256::mul(inv[col * n + j], scale);
            }
            for r in 0..n {
                let f = a[r * n + col];
                if r == col || f == 0 {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] ^= gf256::mul(f, a[col * n + j]);
                    inv[r * n + j] ^= gf256::mul(f, inv[col * n + j]);
                }
            }
        }
        Some(Matrix { rows: n, cols: n, data: inv })
    }
}

/// Message and code dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    /// Message length in bytes.
    pub m: usize,
    pub k: usize,
    pub n: usize,
}

impl CodeParams {
    pub fn new(m: usize, k: usize, n: usize) -> Result<Self, CodingError> {
        if k == 0 || k > n || n > MAX_CHUNKS {
            return Err(CodingError::Params { k, n });
        }
        if m == 0 {
            return Err(CodingError::EmptyMessage);
        }
        Ok(Self { m, k, n })
    }

    /// Bytes per chunk, `⌈m/k⌉`.
    pub fn chunk_len(&self) -> usize {
        self.m.div_ceil(self.k)
    }

    /// The ideal chunk length `m/k` used by the delay and detection formulas.
    pub fn ideal_chunk_len(&self) -> f64 {
        self.m as f64 / self.k as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedChunk {
    pub index: usize,
    pub payload: Vec<u8>,
}

/// Encoder/decoder for one `(m, k, n)`; the generator is built once.
#[derive(Debug, Clone)]
pub struct Codec {
    params: CodeParams,
    generator: Matrix,
}

impl Codec {
    pub fn new(params: CodeParams) -> Self {
        let (k, n) = (params.k, params.n);
        let v = Matrix::vandermonde(n, k);
        let top: Vec<usize> = (0..k).collect();
        let top_inv = v.select_rows(&top).inverse().expect("Vandermonde block on distinct points is invertible");
        Self { params, generator: v.mul(&top_inv) }
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<CodedChunk>, CodingError> {
        let CodeParams { m, k, n } = self.params;
        if message.len() != m {
            return Err(CodingError::MessageLength { expected: m, got: message.len() });
        }
        let len = self.params.chunk_len();
        let mut padded = message.to_vec();
        padded.resize(len * k, 0);
        let data: Vec<&[u8]> = padded.chunks(len).collect();

        let mut chunks: Vec<CodedChunk> =
            data.iter().enumerate().map(|(index, d)| CodedChunk { index, payload: d.to_vec() }).collect();
        for index in k..n {
            let row = self.generator.row(index);
            let mut payload = vec![0u8; len];
            for (&coef, d) in row.iter().zip(&data) {
                if coef == 0 {
                    continue;
                }
                for (p, &b) in payload.iter_mut().zip(d.iter()) {
                    *p ^= gf256::mul(coef, b);
                }
            }
            chunks.push(CodedChunk { index, payload });
        }
        Ok(chunks)
    }

    /// Recovers the message from exactly `k` chunks with distinct indices.
    pub fn decode(&self, chunks: &[CodedChunk]) -> Result<Vec<u8>, CodingError> {
        let CodeParams { m, k, n } = self.params;
        let len = self.params.chunk_len();
        if chunks.len() < k {
            return Err(CodingError::TooFewChunks { needed: k, got: chunks.len() });
        }
        let chunks = &chunks[..k];
        let mut seen = vec![false; n];
        for c in chunks {
            if c.index >= n {
                return Err(CodingError::IndexOutOfRange { index: c.index, n });
            }
            if std::mem::replace(&mut seen[c.index], true) {
                return Err(CodingError::DuplicateIndex(c.index));
            }
            if c.payload.len() != len {
                return Err(CodingError::ChunkLength { index: c.index, expected: len, got: c.payload.len() });
            }
        }

        let mut out = vec![0u8; len * k];
        if chunks.iter().all(|c| c.index < k) {
            for c in chunks {
                out[c.index * len..(c.index + 1) * len].copy_from_slice(&c.payload);
            }
        } else {
            let rows: Vec<usize> = chunks.iter().map(|c| c.index).collect();
            let inv = self.generator.select_rows(&rows).inverse().expect("any k generator rows are independent");
            for i in 0..k {
                let dst = &mut out[i * len..(i + 1) * len];
                for (t, c) in chunks.iter().enumerate() {
                    let coef = inv.data[i * k + t];
                    if coef == 0 {
                        continue;
                    }
                    for (o, &b) in dst.iter_mut().zip(&c.payload) {
                        *o ^= gf256::mul(coef, b);
                    }
                }
            }
        }
        out.truncate(m);
        Ok(out)
    }
}

pub fn encode(message: &[u8], params: CodeParams) -> Result<Vec<CodedChunk>, CodingError> {
    Codec::new(params).encode(message)
}

pub fn decode(chunks: &[CodedChunk], params: CodeParams) -> Result<Vec<u8>, CodingError> {
    Codec::new(params).decode(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    fn pick(chunks: &[CodedChunk], idx: &[usize]) -> Vec<CodedChunk> {
        idx.iter().map(|&i| chunks[i].clone()).collect()
    }

    #[test]
    fn field_axioms_spot_check() {
        for a in 1..=255u8 {
            assert_eq!(gf256::mul(a, gf256::inv(a)), 1);
            assert_eq!(gf256::mul(a, 1), a);
            assert_eq!(gf256::pow(a, 255), 1);
        }
        // x · x⁷ = x⁸ ≡ x⁴ + x³ + x² + 1.
        assert_eq!(gf256::mul(2, 0x80), 0x1d);
        assert_eq!(gf256::add(7, 7), 0);
    }

    #[test]
    fn replication_when_k_is_one() {
        let p = CodeParams::new(5, 1, 3).unwrap();
        let chunks = encode(b"hello", p).unwrap();
        assert!(chunks.iter().all(|c| c.payload == b"hello"));
    }

    #[test]
    fn identity_when_k_equals_n() {
        let p = CodeParams::new(6, 3, 3).unwrap();
        let chunks = encode(b"abcdef", p).unwrap();
        let payloads: Vec<&[u8]> = chunks.iter().map(|c| c.payload.as_slice()).collect();
        assert_eq!(payloads, vec![b"ab", b"cd", b"ef"]);
    }

    #[test]
    fn abcd_two_of_three() {
        let p = CodeParams::new(4, 2, 3).unwrap();
        let chunks = encode(b"ABCD", p).unwrap();
        assert_eq!(chunks[0].payload, b"AB");
        assert_eq!(chunks[1].payload, b"CD");
        for idx in subsets(3, 2) {
            assert_eq!(decode(&pick(&chunks, &idx), p).unwrap(), b"ABCD", "{idx:?}");
        }
    }

    #[test]
    fn kib_message_four_of_six() {
        let msg: Vec<u8> = (0..1024u32).map(|i| (i.wrapping_mul(2654435761) >> 13) as u8).collect();
        let p = CodeParams::new(1024, 4, 6).unwrap();
        let codec = Codec::new(p);
        let chunks = codec.encode(&msg).unwrap();
        let all = subsets(6, 4);
        assert_eq!(all.len(), 15);
        for idx in all {
            assert_eq!(codec.decode(&pick(&chunks, &idx)).unwrap(), msg);
        }
    }

    #[test]
    fn systematic_decode_and_padding() {
        let p = CodeParams::new(7, 3, 5).unwrap();
        assert_eq!(p.chunk_len(), 3);
        let chunks = encode(b"padding", p).unwrap();
        assert_eq!(chunks[1].payload, b"din".to_vec());
        assert_eq!(chunks[2].payload, vec![b'g', 0, 0]);
        assert_eq!(decode(&chunks[..3], p).unwrap(), b"padding");
        assert_eq!(decode(&pick(&chunks, &[4, 0, 3]), p).unwrap(), b"padding");
    }

    #[test]
    fn error_paths() {
        assert_eq!(CodeParams::new(4, 3, 2), Err(CodingError::Params { k: 3, n: 2 }));
        assert_eq!(CodeParams::new(4, 1, 256), Err(CodingError::Params { k: 1, n: 256 }));
        assert_eq!(CodeParams::new(0, 1, 2), Err(CodingError::EmptyMessage));
        let p = CodeParams::new(4, 2, 4).unwrap();
        assert_eq!(encode(b"ABC", p), Err(CodingError::MessageLength { expected: 4, got: 3 }));
        let chunks = encode(b"ABCD", p).unwrap();
        assert_eq!(decode(&chunks[..1], p), Err(CodingError::TooFewChunks { needed: 2, got: 1 }));
        assert_eq!(decode(&pick(&chunks, &[1, 1]), p), Err(CodingError::DuplicateIndex(1)));
        let mut bad = pick(&chunks, &[0, 1]);
        bad[1].index = 9;
        assert_eq!(decode(&bad, p), Err(CodingError::IndexOutOfRange { index: 9, n: 4 }));
    }

    #[test]
    fn mds_exhaustive_small() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        for n in 1..=8 {
            for k in 1..=n {
                for m in [1, k, 3 * k + 1] {
                    let msg: Vec<u8> = (0..m)
                        .map(|_| {
                            seed ^= seed << 13;
                            seed ^= seed >> 7;
                            seed ^= seed << 17;
                            seed as u8
                        })
                        .collect();
                    let p = CodeParams::new(m, k, n).unwrap();
                    let codec = Codec::new(p);
                    let chunks = codec.encode(&msg).unwrap();
                    for idx in subsets(n, k) {
                        assert_eq!(codec.decode(&pick(&chunks, &idx)).unwrap(), msg);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn any_k_chunks_round_trip(
            msg in proptest::collection::vec(any::<u8>(), 1..300),
            k in 1usize..12,
            extra in 0usize..8,
            order in any::<u64>(),
        ) {
            let n = k + extra;
            let p = CodeParams::new(msg.len(), k, n).unwrap();
            let codec = Codec::new(p);
            let chunks = codec.encode(&msg).unwrap();
            prop_assert_eq!(chunks.clone(), codec.encode(&msg).unwrap());
            // Pseudo-random k-subset in pseudo-random order.
            let mut idx: Vec<usize> = (0..n).collect();
            let mut s = order | 1;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            idx.truncate(k);
            prop_assert_eq!(codec.decode(&pick(&chunks, &idx)).unwrap(), msg);
        }
    }
}
