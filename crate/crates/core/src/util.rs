/// FNV-1a over bytes. Used wherever a platform-stable hash is required
/// (seed derivation, feature hashing); std's SipHash is randomly keyed.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
