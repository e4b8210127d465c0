/// Label separating independent families of uniforms drawn from one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StreamTag(pub u64);

impl StreamTag {
    /// A tag independent of `self` for every `index`; used for per-trial and
    /// per-link streams.
    pub fn derive(self, index: u64) -> StreamTag {
        StreamTag(mix(self.0 ^ mix(index.wrapping_add(0x6A09_E667_F3BC_C909))))
    }
}

/// Counter-based uniforms `U(stream, site, level)` in `[0, 1)`.
///
/// Each value is a hash of the tuple, so values do not depend on the order
/// in which they are queried and any subset can be materialized lazily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UniformField {
    seed: u64,
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl UniformField {
    pub fn new(seed: u64) -> Self {
        UniformField { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Field with an unrelated seed, e.g. for trial `index` of a campaign.
    pub fn substream(&self, index: u64) -> UniformField {
        UniformField { seed: mix(self.seed ^ mix(index ^ 0xD1B5_4A32_D192_ED03)) }
    }

    pub fn bits(&self, stream: StreamTag, site: i64, level: u64) -> u64 {
        let h = mix(self.seed ^ mix(stream.0));
        let h = mix(h ^ mix(site as u64 ^ 0x243F_6A88_85A3_08D3));
        mix(h ^ level.wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
    }

    pub fn value(&self, stream: StreamTag, site: i64, level: u64) -> f64 {
        (self.bits(stream, site, level) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
