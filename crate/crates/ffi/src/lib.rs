//! C ABI for the pfilter membership filters.
//!
//! Filters are opaque `PfFilter` handles created by the `pf_*_new`
//! constructors or `pf_deserialize` and released with `pf_filter_free`.
//! Every fallible function returns a `PfStatus` and writes results through
//! out-pointers. Byte buffers returned by `pf_serialize` are released with
//! `pf_buffer_free`. Handles are not thread-safe; callers serialize access.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use pfilter::analytics::{expected_fpr, optimal_hash_count, predicted_fpr, required_bits};
use pfilter::{
    AnyFilter, BlockedBloomFilter, BloomFilter, CountingBloomFilter, CuckooConfig, CuckooFilter,
    DecodeError, Error, FuzzyFoldedFilter, InsertError, MembershipFilter, QuotientFilter,
};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    /// Cuckoo or quotient filter has no room for the element.
    Full = 3,
    /// Cuckoo bucket pair already holds the maximum copies of the fingerprint.
    DuplicateBound = 4,
    /// Fuzzy-folded filter cannot fold any further.
    CapacityExhausted = 5,
    /// The filter kind does not support the operation.
    Unsupported = 6,
    /// Serialized bytes are malformed.
    Decode = 7,
    /// An internal panic was caught at the boundary.
    Internal = 8,
}

/// Opaque filter handle.
pub struct PfFilter {
    inner: AnyFilter,
}

impl From<Error> for PfStatus {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => PfStatus::InvalidParameter,
            Error::CapacityExhausted(_) => PfStatus::CapacityExhausted,
            Error::Insert(e) => e.into(),
            Error::Decode(_) => PfStatus::Decode,
            Error::Unsupported(_) => PfStatus::Unsupported,
            Error::FalseNegative(_) => PfStatus::Internal,
        }
    }
}

impl From<InsertError> for PfStatus {
    fn from(e: InsertError) -> Self {
        match e {
            InsertError::Full => PfStatus::Full,
            InsertError::DuplicateBound => PfStatus::DuplicateBound,
            InsertError::CapacityExhausted => PfStatus::CapacityExhausted,
        }
    }
}

impl From<DecodeError> for PfStatus {
    fn from(_: DecodeError) -> Self {
        PfStatus::Decode
    }
}

fn guard(body: impl FnOnce() -> Result<(), PfStatus>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => PfStatus::Internal,
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), PfStatus> {
    if out.is_null() {
        return Err(PfStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], PfStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(PfStatus::NullPointer);
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn filter<'a>(f: *const PfFilter) -> Result<&'a AnyFilter, PfStatus> {
    f.as_ref().map(|f| &f.inner).ok_or(PfStatus::NullPointer)
}

unsafe fn filter_mut<'a>(f: *mut PfFilter) -> Result<&'a mut AnyFilter, PfStatus> {
    f.as_mut().map(|f| &mut f.inner).ok_or(PfStatus::NullPointer)
}

unsafe fn publish(
    out: *mut *mut PfFilter,
    make: impl FnOnce() -> Result<AnyFilter, Error>,
) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return Err(PfStatus::NullPointer);
        }
        let inner = make()?;
        out.write(Box::into_raw(Box::new(PfFilter { inner })));
        Ok(())
    })
}

/// Standard Bloom filter of `m` bits with `h` hash functions.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_bloom_new(m: u64, h: u32, seed: u64, out: *mut *mut PfFilter) -> PfStatus {
    publish(out, || Ok(BloomFilter::new(m, h, seed)?.into()))
}

/// Counting Bloom filter of `m` counters of `counter_width` bits (0 selects the default).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_counting_new(
    m: u64,
    h: u32,
    seed: u64,
    counter_width: u32,
    out: *mut *mut PfFilter,
) -> PfStatus {
    publish(out, || {
        Ok(match counter_width {
            0 => CountingBloomFilter::new(m, h, seed)?,
            w => CountingBloomFilter::with_counter_width(m, h, seed, w)?,
        }
        .into())
    })
}

/// Blocked Bloom filter of `m` bits in blocks of `block_bits` (0 selects the default).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_blocked_new(
    m: u64,
    h: u32,
    seed: u64,
    block_bits: u32,
    out: *mut *mut PfFilter,
) -> PfStatus {
    publish(out, || {
        Ok(match block_bits {
            0 => BlockedBloomFilter::new(m, h, seed)?,
            b => BlockedBloomFilter::with_block_bits(m, h, seed, b)?,
        }
        .into())
    })
}

/// Quotient filter with `2^q` slots and `r`-bit remainders.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_quotient_new(q: u8, r: u8, seed: u64, out: *mut *mut PfFilter) -> PfStatus {
    publish(out, || Ok(QuotientFilter::new(q, r, seed)?.into()))
}

/// Fuzzy-folded filter with a budget of `m` bits and fold threshold in `(0, 1]`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_fuzzyfold_new(
    m: u64,
    h: u32,
    seed: u64,
    threshold: f64,
    out: *mut *mut PfFilter,
) -> PfStatus {
    publish(out, || Ok(FuzzyFoldedFilter::with_threshold(m, h, seed, threshold)?.into()))
}

/// Cuckoo filter with `2^bucket_bits` buckets of `slots_per_bucket` fingerprints.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_cuckoo_new(
    bucket_bits: u8,
    slots_per_bucket: u8,
    fingerprint_bits: u8,
    max_kicks: u32,
    seed: u64,
    out: *mut *mut PfFilter,
) -> PfStatus {
    publish(out, || {
        let config = CuckooConfig::new(bucket_bits, seed)
            .slots_per_bucket(slots_per_bucket)
            .fingerprint_bits(fingerprint_bits)
            .max_kicks(max_kicks);
        Ok(CuckooFilter::new(config)?.into())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_filter_free(f: *mut PfFilter) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Kind byte of the filter: 1 bloom, 2 counting, 3 blocked, 4 quotient,
/// 5 fuzzy-folded, 6 cuckoo.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_kind(f: *const PfFilter, out: *mut u8) -> PfStatus {
    guard(|| write(out, filter(f)?.kind().byte()))
}

/// # Safety
/// `f` must be a live handle; `data` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn pf_insert(f: *mut PfFilter, data: *const u8, len: usize) -> PfStatus {
    guard(|| {
        let e = bytes(data, len)?;
        filter_mut(f)?.try_insert(e).map_err(PfStatus::from)
    })
}

/// # Safety
/// `f` must be a live handle; `data` must point to `len` readable bytes;
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_contains(
    f: *const PfFilter,
    data: *const u8,
    len: usize,
    out: *mut bool,
) -> PfStatus {
    guard(|| {
        let e = bytes(data, len)?;
        write(out, filter(f)?.contains(e))
    })
}

/// Removes one copy of an element. `out` receives whether a copy was found.
/// Returns `Unsupported` for kinds without removal.
///
/// # Safety
/// `f` must be a live handle; `data` must point to `len` readable bytes;
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_remove(
    f: *mut PfFilter,
    data: *const u8,
    len: usize,
    out: *mut bool,
) -> PfStatus {
    guard(|| {
        let e = bytes(data, len)?;
        if out.is_null() {
            return Err(PfStatus::NullPointer);
        }
        let found = filter_mut(f)?.remove(e)?;
        write(out, found)
    })
}

/// Number of live elements.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_len(f: *const PfFilter, out: *mut u64) -> PfStatus {
    guard(|| write(out, filter(f)?.len()))
}

/// Expected false positive rate in the filter's current state.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_expected_fpr(f: *const PfFilter, out: *mut f64) -> PfStatus {
    guard(|| write(out, expected_fpr(filter(f)?)))
}

/// Encodes the filter in the binary format. The buffer must be released
/// with `pf_buffer_free(*out_data, *out_len)`.
///
/// # Safety
/// `f` must be a live handle; `out_data` and `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_serialize(
    f: *const PfFilter,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> PfStatus {
    guard(|| {
        if out_data.is_null() || out_len.is_null() {
            return Err(PfStatus::NullPointer);
        }
        let buf = filter(f)?.to_bytes().into_boxed_slice();
        out_len.write(buf.len());
        out_data.write(Box::into_raw(buf) as *mut u8);
        Ok(())
    })
}

/// Releases a buffer from `pf_serialize`. Null is ignored.
///
/// # Safety
/// `data` and `len` must be exactly as returned by `pf_serialize`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_buffer_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Decodes a filter from the binary format into a new handle.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pf_deserialize(data: *const u8, len: usize, out: *mut *mut PfFilter) -> PfStatus {
    match bytes(data, len) {
        Ok(b) => publish(out, || Ok(AnyFilter::from_bytes(b)?)),
        Err(s) => s,
    }
}

/// Both forms of the Bloom false positive estimate for `n` elements.
///
/// # Safety
/// `out_exact` and `out_approximate` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_predicted_fpr(
    m: u64,
    h: u32,
    n: u64,
    out_exact: *mut f64,
    out_approximate: *mut f64,
) -> PfStatus {
    guard(|| {
        if out_exact.is_null() || out_approximate.is_null() {
            return Err(PfStatus::NullPointer);
        }
        let p = predicted_fpr(m, h, n)?;
        out_exact.write(p.exact);
        out_approximate.write(p.approximate);
        Ok(())
    })
}

/// Hash count for a target false positive rate.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_optimal_hash_count(target_fpr: f64, out: *mut u32) -> PfStatus {
    guard(|| write(out, optimal_hash_count(target_fpr)?.rounded))
}

/// Smallest bit count meeting `target_fpr` for `n` elements.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pf_required_bits(n: u64, target_fpr: f64, out: *mut u64) -> PfStatus {
    guard(|| write(out, required_bits(n, target_fpr)?))
}

/// Static, NUL-terminated description of a `PfStatus` value. Unknown
/// codes get a generic message.
#[no_mangle]
pub extern "C" fn pf_status_message(status: u32) -> *const c_char {
    let msg: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer argument\0",
        2 => b"invalid parameter\0",
        3 => b"filter is full\0",
        4 => b"duplicate fingerprint bound reached\0",
        5 => b"no room left to fold\0",
        6 => b"operation not supported by this filter kind\0",
        7 => b"malformed filter bytes\0",
        8 => b"internal error\0",
        _ => b"unknown status\0",
    };
    msg.as_ptr() as *const c_char
}
