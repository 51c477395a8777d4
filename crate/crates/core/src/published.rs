//! Reference values for the two published result tables.
//!
//! Table 1 is microstrip impedance at eps_r = 2 (ohms); Table 2 is patch
//! resonant frequency at eps_r = 6 with a 9.5 mm effective length (MHz).
//! Each table lists the closed-form value, a neural-network prediction, a
//! linear-regression prediction and the two percent-error columns.
//!
//! Table 1's printed w/h column skips from 6.0 to 7.0 while the values keep
//! stepping by 0.5; every row from the printed 7.0 onward matches the model
//! at 0.5 less. [`PublishedTable::x`] holds the corrected abscissae and
//! [`PublishedTable::printed_x`] the labels as printed.

#[derive(Debug, Clone, Copy)]
pub struct PublishedTable {
    pub id: u8,
    pub printed_x: &'static [f64],
    pub x: &'static [f64],
    pub actual: &'static [f64],
    pub nn: &'static [f64],
    pub lr: &'static [f64],
    pub nn_pct: &'static [f64],
    pub lr_pct: &'static [f64],
    /// Multiply a raw model value (ohms or hertz) by this to get table units.
    pub raw_to_table: f64,
    pub table_unit: &'static str,
}

impl PublishedTable {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub const TABLE1: PublishedTable = PublishedTable {
    id: 1,
    printed_x: &[
        1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 7.0, 7.5, 8.0, 8.5, 9.0,
    ],
    x: &[
        1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5,
    ],
    actual: &[
        98.525, 80.819, 68.774, 59.999, 53.296, 47.993, 43.686, 40.113, 37.098, 34.517, 32.281,
        30.325, 28.598, 27.061, 25.685, 24.445,
    ],
    nn: &[
        97.323, 81.450, 68.488, 60.280, 53.129, 48.268, 43.408, 39.950, 37.376, 34.802, 32.228,
        29.801, 28.517, 27.233, 25.949, 24.665,
    ],
    lr: &[
        71.658, 68.265, 64.871, 61.477, 58.084, 54.690, 51.297, 47.903, 44.509, 41.116, 37.722,
        34.329, 30.935, 27.541, 24.148, 20.754,
    ],
    nn_pct: &[
        1.220, 0.781, 0.416, 0.468, 0.313, 0.573, 0.636, 0.406, 0.749, 0.826, 0.164, 1.728, 0.283,
        0.636, 1.028, 0.900,
    ],
    lr_pct: &[
        27.269, 15.533, 5.675, 2.463, 8.984, 13.954, 17.422, 19.420, 19.977, 19.118, 16.855,
        13.204, 8.172, 1.774, 5.984, 15.099,
    ],
    raw_to_table: 1.0,
    table_unit: "ohm",
};

pub const TABLE2: PublishedTable = PublishedTable {
    id: 2,
    printed_x: &[
        1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5,
    ],
    x: &[
        1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5,
    ],
    actual: &[
        7710.557, 7585.017, 7489.211, 7411.944, 7347.491, 7292.474, 7244.707, 7202.688, 7165.336,
        7131.843, 7101.594, 7074.102, 7048.982, 7025.921, 7004.661, 6984.987, 6966.719, 6949.706,
    ],
    nn: &[
        7692.914, 7593.029, 7493.143, 7397.386, 7348.007, 7298.629, 7251.310, 7204.505, 7157.707,
        7123.447, 7100.492, 7077.537, 7054.582, 7031.627, 7008.672, 6985.717, 6962.762, 6939.807,
    ],
    lr: &[
        7529.473, 7491.309, 7453.145, 7414.982, 7376.818, 7338.654, 7300.490, 7262.326, 7224.162,
        7185.999, 7147.835, 7109.671, 7071.507, 7033.343, 6995.180, 6957.016, 6918.852, 6880.688,
    ],
    nn_pct: &[
        0.229, 0.106, 0.053, 0.196, 0.007, 0.084, 0.091, 0.025, 0.106, 0.118, 0.016, 0.049, 0.079,
        0.081, 0.057, 0.010, 0.057, 0.142,
    ],
    lr_pct: &[
        2.349, 1.235, 0.482, 0.041, 0.399, 0.633, 0.770, 0.828, 0.821, 0.759, 0.651, 0.503, 0.320,
        0.106, 0.135, 0.400, 0.687, 0.993,
    ],
    raw_to_table: 1e-6,
    table_unit: "MHz",
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_lengths_agree() {
        for t in [TABLE1, TABLE2] {
            let n = t.len();
            for col in [t.printed_x, t.actual, t.nn, t.lr, t.nn_pct, t.lr_pct] {
                assert_eq!(col.len(), n, "table {}", t.id);
            }
        }
        assert_eq!(TABLE1.len(), 16);
        assert_eq!(TABLE2.len(), 18);
    }
}
