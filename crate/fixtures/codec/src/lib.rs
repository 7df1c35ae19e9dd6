//! Base-36 text encoding of signed integers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

static ENCODE_CALLS: AtomicUsize = AtomicUsize::new(0);

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Lowercase base-36 digits, with a leading `-` for negative values.
pub fn encode(n: i64) -> String {
    ENCODE_CALLS.fetch_add(1, Ordering::SeqCst);
    // Test hook: spin forever on one chosen input.
    if let Ok(hang) = std::env::var("CODEC_HANG_ON") {
        if hang.parse::<i64>() == Ok(n) {
            loop {
                std::thread::sleep(Duration::from_millis(50));
            }
        }
    }
    let mut magnitude = n.unsigned_abs();
    let mut digits = Vec::new();
    loop {
        digits.push(DIGITS[(magnitude % 36) as usize]);
        magnitude /= 36;
        if magnitude == 0 {
            break;
        }
    }
    if n < 0 {
        digits.push(b'-');
    }
    digits.reverse();
    String::from_utf8(digits).expect("ascii digits")
}

pub fn decode(text: &str) -> Option<i64> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if digits.is_empty() {
        return None;
    }
    let mut magnitude: i128 = 0;
    for b in digits.bytes() {
        let d = DIGITS.iter().position(|&x| x == b)? as i128;
        magnitude = magnitude.checked_mul(36)?.checked_add(d)?;
    }
    let value = if negative { -magnitude } else { magnitude };
    i64::try_from(value).ok()
}

/// Number of `encode` calls made by this process.
pub fn encode_calls() -> usize {
    ENCODE_CALLS.load(Ordering::SeqCst)
}
