//! The black-box layer: salted bit-string encodings, opaque handles, and the
//! oracle contract through which every algorithm reaches an algebra.
//!
//! An encoding of length `n` splits a string into `payload_bits` low bits
//! (the element index) and `salt_bits` high bits. Each oracle answer draws a
//! fresh salt, so one element comes back under many strings and string
//! comparison says nothing about element equality.

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::CayleyAlgebra;
use crate::signature::Op;

/// Upper bound on the encoding length.
pub const MAX_ENCODING_LEN: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("handle is not in the domain of the encoding")]
    InvalidHandle,
    #[error("`{op:?}` expects {expected} arguments, got {got}")]
    ArityMismatch { op: Op, expected: usize, got: usize },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(Op),
    #[error("encoding of {payload} + {salt} bits exceeds {MAX_ENCODING_LEN}")]
    SizeOverflow { payload: u32, salt: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    payload_bits: u32,
    salt_bits: u32,
    size: u64,
}

impl Encoding {
    /// `payload_bits = ceil(log2(max(size, 2)))`.
    pub fn new(size: usize, salt_bits: u32) -> Result<Encoding, OracleError> {
        let payload_bits = usize::BITS - (size.max(2) - 1).leading_zeros();
        if payload_bits + salt_bits > MAX_ENCODING_LEN {
            return Err(OracleError::SizeOverflow {
                payload: payload_bits,
                salt: salt_bits,
            });
        }
        Ok(Encoding {
            payload_bits,
            salt_bits,
            size: size as u64,
        })
    }

    /// The encoding length `n`.
    pub fn len(&self) -> u32 {
        self.payload_bits + self.salt_bits
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn salt_bits(&self) -> u32 {
        self.salt_bits
    }

    fn salt_mask(&self) -> u64 {
        if self.salt_bits == 0 {
            0
        } else {
            u64::MAX >> (64 - self.salt_bits)
        }
    }

    pub fn encode(&self, index: usize, salt: u64) -> Handle {
        debug_assert!((index as u64) < self.size);
        let salt = salt & self.salt_mask();
        let bits = if self.salt_bits == 0 {
            index as u64
        } else {
            (salt << self.payload_bits) | index as u64
        };
        Handle {
            bits,
            len: self.len() as u8,
        }
    }

    /// `ρ(h)`, or `None` outside the domain.
    pub fn decode(&self, h: &Handle) -> Option<usize> {
        if u32::from(h.len) != self.len() {
            return None;
        }
        let payload = h.bits & ((1u64 << self.payload_bits) - 1);
        (payload < self.size).then_some(payload as usize)
    }
}

/// An opaque element representation: a bit string of the session's length.
///
/// Deliberately not `PartialEq`; element equality is an oracle query.
#[derive(Clone)]
pub struct Handle {
    bits: u64,
    len: u8,
}

impl Handle {
    pub fn len(&self) -> u32 {
        u32::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The raw string, most significant bit first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// The raw bits, for tests that need to compare strings.
    pub fn raw_bits(&self) -> u64 {
        self.bits
    }
}

impl fmt::Debug for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Handle({})", self.to_bit_string())
    }
}

/// Query counts: equality queries, and operation queries per slot
/// (`+`, `-`, `0`, then `Ω` in signature order).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryCounts {
    pub equality: u64,
    pub operations: Vec<u64>,
}

impl QueryCounts {
    pub fn new(slots: usize) -> Self {
        QueryCounts {
            equality: 0,
            operations: vec![0; slots],
        }
    }

    pub fn total_operations(&self) -> u64 {
        self.operations.iter().sum()
    }

    pub fn record(&mut self, op: Op) {
        self.operations[op.slot()] += 1;
    }
}

/// The Σ-oracle contract.
pub trait Oracle {
    /// Encoding length `n` of the black-box algebra.
    fn encoding_len(&self) -> u32;

    /// Arities of the `Ω` symbols, in signature order.
    fn omega_arities(&self) -> &[usize];

    /// Decides whether two handles represent the same element.
    fn query_equal(&mut self, a: &Handle, b: &Handle) -> Result<bool, OracleError>;

    /// Returns a handle of `σ(args)`.
    fn query_op(&mut self, op: Op, args: &[Handle]) -> Result<Handle, OracleError>;

    fn counts(&self) -> &QueryCounts;

    fn add(&mut self, a: &Handle, b: &Handle) -> Result<Handle, OracleError> {
        self.query_op(Op::Add, &[a.clone(), b.clone()])
    }

    fn neg(&mut self, a: &Handle) -> Result<Handle, OracleError> {
        self.query_op(Op::Neg, std::slice::from_ref(a))
    }

    fn zero(&mut self) -> Result<Handle, OracleError> {
        self.query_op(Op::Zero, &[])
    }

    fn arity(&self, op: Op) -> Option<usize> {
        match op {
            Op::Add => Some(2),
            Op::Neg => Some(1),
            Op::Zero => Some(0),
            Op::Omega(i) => self.omega_arities().get(i).copied(),
        }
    }
}

/// Removes handles that repeat an earlier element, keeping first
/// occurrences in order. Costs at most `|input| · |output|` equality queries.
pub fn dedup_handles<O: Oracle + ?Sized>(
    o: &mut O,
    input: impl IntoIterator<Item = Handle>,
) -> Result<Vec<Handle>, OracleError> {
    let mut out: Vec<Handle> = Vec::new();
    'next: for h in input {
        for kept in &out {
            if o.query_equal(kept, &h)? {
                continue 'next;
            }
        }
        out.push(h);
    }
    Ok(out)
}

/// An oracle over an explicit algebra. Holds the only decoding path.
pub struct OracleSession<'a> {
    alg: &'a CayleyAlgebra,
    encoding: Encoding,
    arities: Vec<usize>,
    salts: ChaCha8Rng,
    counts: QueryCounts,
}

impl<'a> OracleSession<'a> {
    pub fn new(alg: &'a CayleyAlgebra, salt_bits: u32, seed: u64) -> Result<Self, OracleError> {
        Self::with_rng(alg, salt_bits, ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uses `salts` as the salt source, e.g. one stream of a split generator.
    pub fn with_rng(alg: &'a CayleyAlgebra, salt_bits: u32, salts: ChaCha8Rng) -> Result<Self, OracleError> {
        Ok(OracleSession {
            alg,
            encoding: Encoding::new(alg.size(), salt_bits)?,
            arities: alg.signature().arities(),
            salts,
            counts: QueryCounts::new(alg.signature().slot_count()),
        })
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn algebra(&self) -> &'a CayleyAlgebra {
        self.alg
    }

    fn fresh_salt(&mut self) -> u64 {
        if self.encoding.salt_bits == 0 {
            0
        } else {
            self.salts.next_u64()
        }
    }

    /// A fresh handle of a known element, for building algorithm inputs.
    pub fn handle_of(&mut self, index: usize) -> Handle {
        assert!(index < self.alg.size(), "element {index} out of range");
        let salt = self.fresh_salt();
        self.encoding.encode(index, salt)
    }

    pub fn handles_of(&mut self, indices: &[usize]) -> Vec<Handle> {
        indices.iter().map(|&i| self.handle_of(i)).collect()
    }

    /// `ρ(h)`. Test and harness code only; algorithms never call this.
    pub fn decode_for_test(&self, h: &Handle) -> Result<usize, OracleError> {
        self.encoding.decode(h).ok_or(OracleError::InvalidHandle)
    }

    pub fn decode_all(&self, hs: &[Handle]) -> Result<Vec<usize>, OracleError> {
        hs.iter().map(|h| self.decode_for_test(h)).collect()
    }
}

impl Oracle for OracleSession<'_> {
    fn encoding_len(&self) -> u32 {
        self.encoding.len()
    }

    fn omega_arities(&self) -> &[usize] {
        &self.arities
    }

    fn query_equal(&mut self, a: &Handle, b: &Handle) -> Result<bool, OracleError> {
        let x = self.decode_for_test(a)?;
        let y = self.decode_for_test(b)?;
        self.counts.equality += 1;
        Ok(x == y)
    }

    fn query_op(&mut self, op: Op, args: &[Handle]) -> Result<Handle, OracleError> {
        let expected = self.arity(op).ok_or(OracleError::UnknownSymbol(op))?;
        if expected != args.len() {
            return Err(OracleError::ArityMismatch {
                op,
                expected,
                got: args.len(),
            });
        }
        let mut idx = [0usize; 8];
        let value = if args.len() <= idx.len() {
            for (slot, h) in idx.iter_mut().zip(args) {
                *slot = self.decode_for_test(h)?;
            }
            self.alg.apply(op, &idx[..args.len()])
        } else {
            let v = self.decode_all(args)?;
            self.alg.apply(op, &v)
        };
        self.counts.record(op);
        let salt = self.fresh_salt();
        Ok(self.encoding.encode(value, salt))
    }

    fn counts(&self) -> &QueryCounts {
        &self.counts
    }
}
