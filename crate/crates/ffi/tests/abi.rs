use std::ffi::CStr;
use std::ptr;

use pfilter_ffi::*;

fn new_filters() -> Vec<*mut PfFilter> {
    let mut out = Vec::new();
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(pf_bloom_new(1 << 16, 5, 1, &mut f), PfStatus::Ok);
        out.push(f);
        assert_eq!(pf_counting_new(1 << 16, 5, 1, 0, &mut f), PfStatus::Ok);
        out.push(f);
        assert_eq!(pf_blocked_new(1 << 16, 5, 1, 0, &mut f), PfStatus::Ok);
        out.push(f);
        assert_eq!(pf_quotient_new(12, 8, 1, &mut f), PfStatus::Ok);
        out.push(f);
        assert_eq!(pf_fuzzyfold_new(1 << 16, 5, 1, 0.5, &mut f), PfStatus::Ok);
        out.push(f);
        assert_eq!(pf_cuckoo_new(10, 4, 16, 500, 1, &mut f), PfStatus::Ok);
        out.push(f);
    }
    out
}

fn key(i: usize) -> Vec<u8> {
    format!("key-{i}").into_bytes()
}

#[test]
fn insert_contains_round_trip_every_kind() {
    for (i, f) in new_filters().into_iter().enumerate() {
        unsafe {
            let mut kind = 0u8;
            assert_eq!(pf_kind(f, &mut kind), PfStatus::Ok);
            assert_eq!(kind as usize, i + 1);
            for j in 0..1000 {
                let k = key(j);
                assert_eq!(pf_insert(f, k.as_ptr(), k.len()), PfStatus::Ok);
            }
            let (mut data, mut len) = (ptr::null_mut(), 0usize);
            assert_eq!(pf_serialize(f, &mut data, &mut len), PfStatus::Ok);
            let mut g = ptr::null_mut();
            assert_eq!(pf_deserialize(data, len, &mut g), PfStatus::Ok);
            pf_buffer_free(data, len);
            for j in 0..5000 {
                let k = key(j);
                let (mut a, mut b) = (false, false);
                assert_eq!(pf_contains(f, k.as_ptr(), k.len(), &mut a), PfStatus::Ok);
                assert_eq!(pf_contains(g, k.as_ptr(), k.len(), &mut b), PfStatus::Ok);
                assert_eq!(a, b);
                if j < 1000 {
                    assert!(a);
                }
            }
            let mut n = 0u64;
            assert_eq!(pf_len(g, &mut n), PfStatus::Ok);
            assert_eq!(n, 1000);
            let mut fpr = -1.0;
            assert_eq!(pf_expected_fpr(g, &mut fpr), PfStatus::Ok);
            assert!((0.0..1.0).contains(&fpr));
            pf_filter_free(f);
            pf_filter_free(g);
        }
    }
}

#[test]
fn removal_support_by_kind() {
    for f in new_filters() {
        unsafe {
            let mut kind = 0u8;
            pf_kind(f, &mut kind);
            let k = key(1);
            pf_insert(f, k.as_ptr(), k.len());
            let mut found = false;
            let status = pf_remove(f, k.as_ptr(), k.len(), &mut found);
            if matches!(kind, 2 | 4 | 6) {
                assert_eq!(status, PfStatus::Ok);
                assert!(found);
            } else {
                assert_eq!(status, PfStatus::Unsupported);
            }
            pf_filter_free(f);
        }
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(pf_bloom_new(0, 5, 1, &mut f), PfStatus::InvalidParameter);
        assert!(f.is_null());
        assert_eq!(pf_bloom_new(64, 5, 1, ptr::null_mut()), PfStatus::NullPointer);
        assert_eq!(pf_insert(ptr::null_mut(), b"a".as_ptr(), 1), PfStatus::NullPointer);
        assert_eq!(pf_deserialize(b"nope".as_ptr(), 4, &mut f), PfStatus::Decode);

        assert_eq!(pf_cuckoo_new(4, 2, 8, 50, 1, &mut f), PfStatus::Ok);
        let mut last = PfStatus::Ok;
        for j in 0..1000 {
            let k = key(j);
            last = pf_insert(f, k.as_ptr(), k.len());
            if last != PfStatus::Ok {
                break;
            }
        }
        assert_eq!(last, PfStatus::Full);
        pf_filter_free(f);

        assert_eq!(pf_cuckoo_new(8, 4, 16, 500, 1, &mut f), PfStatus::Ok);
        let statuses: Vec<PfStatus> = (0..9).map(|_| pf_insert(f, b"same".as_ptr(), 4)).collect();
        assert!(statuses[..8].iter().all(|&s| s == PfStatus::Ok));
        assert_eq!(statuses[8], PfStatus::DuplicateBound);
        pf_filter_free(f);

        let msg = CStr::from_ptr(pf_status_message(PfStatus::Full as u32));
        assert_eq!(msg.to_str().unwrap(), "filter is full");
        assert_eq!(CStr::from_ptr(pf_status_message(99)).to_str().unwrap(), "unknown status");
        pf_filter_free(ptr::null_mut());
        pf_buffer_free(ptr::null_mut(), 0);
    }
}

#[test]
fn analytics() {
    unsafe {
        let (mut exact, mut approx) = (0.0, 0.0);
        assert_eq!(pf_predicted_fpr(1 << 20, 5, 104_857, &mut exact, &mut approx), PfStatus::Ok);
        assert!((approx - 0.009_430_93).abs() < 1e-6);
        let mut h = 0;
        assert_eq!(pf_optimal_hash_count(1.0 / 1024.0, &mut h), PfStatus::Ok);
        assert_eq!(h, 10);
        assert_eq!(pf_optimal_hash_count(1.5, &mut h), PfStatus::InvalidParameter);
        let mut m = 0;
        assert_eq!(pf_required_bits(1_000_000, 0.02, &mut m), PfStatus::Ok);
        assert!(m < 10_000_000);
    }
}
