//! Reference polynomials with their published orders, scores and distance
//! bars, evaluated from first principles and compared.

use serde::Serialize;

use crate::error::Result;
use crate::gf2poly::Gf2Poly;
use crate::profile::ProfileCache;

/// Expected score cell: `Some(v)` a value, `None` a dash (order below `M`).
pub type Cell = Option<u64>;

#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub poly: &'static str,
    pub label: &'static str,
    pub degree: u32,
    pub order: u64,
    pub scores: &'static [(usize, Cell)],
}

#[derive(Clone, Copy, Debug)]
pub struct Table {
    pub id: u8,
    pub title: &'static str,
    pub targets: &'static [usize],
    pub rows: &'static [TableRow],
    /// Needs `2^24`-point transforms.
    pub slow: bool,
}

const fn row(
    poly: &'static str,
    label: &'static str,
    degree: u32,
    order: u64,
    scores: &'static [(usize, Cell)],
) -> TableRow {
    TableRow { poly, label, degree, order, scores }
}

pub const TABLES: &[Table] = &[
    Table {
        id: 1,
        title: "Best CRC codes with up to 15 check bits",
        targets: &[512],
        slow: false,
        rows: &[
            row("93f", "", 11, 762, &[(512, Some(2044))]),
            row("a0f", "", 11, 146, &[(512, None)]),
            row("e21", "5G", 11, 2047, &[(512, Some(1565))]),
            row("1957", "", 12, 1778, &[(512, Some(2056))]),
            row("1637", "", 12, 1905, &[(512, Some(2054))]),
            row("1421", "", 12, 2047, &[(512, Some(2000))]),
            row("299d", "", 13, 3556, &[(512, Some(2078))]),
            row("3c1f", "", 13, 8191, &[(512, Some(1612))]),
            row("6e57", "", 14, 8190, &[(512, Some(2116))]),
            row("629d", "", 14, 1016, &[(512, Some(2034))]),
            row("86ef", "", 15, 15748, &[(512, Some(2138))]),
            row("9be5", "", 15, 16383, &[(512, Some(2134))]),
            row("c099", "", 15, 5355, &[(512, Some(2044))]),
        ],
    },
    Table {
        id: 2,
        title: "Best CRC codes with 16 check bits",
        targets: &[512, 1024, 2048, 4096, 8192],
        slow: false,
        rows: &[
            row("158ff", "", 16, 7161, &[(512, Some(2196)), (1024, Some(4244)), (2048, Some(8340)), (4096, Some(16532)), (8192, None)]),
            row("1a2eb", "", 16, 32767, &[(512, Some(2196)), (1024, Some(4244)), (2048, Some(8340)), (4096, Some(16532)), (8192, Some(32916))]),
            row("11cc3", "", 16, 1905, &[(512, Some(2080)), (1024, Some(4128)), (2048, None), (4096, None), (8192, None)]),
            row("18005", "IBM", 16, 32767, &[(512, Some(1984)), (1024, Some(4032)), (2048, Some(8128)), (4096, Some(16320)), (8192, Some(32704))]),
            row("11021", "CCITT", 16, 32767, &[(512, Some(1984)), (1024, Some(4032)), (2048, Some(8128)), (4096, Some(16320)), (8192, Some(32704))]),
        ],
    },
    Table {
        id: 3,
        title: "Best CRC codes with 17, 18, 19 check bits",
        targets: &[512, 1024, 2048, 4096],
        slow: false,
        rows: &[
            row("2ca6d", "", 17, 57316, &[(512, Some(2264)), (1024, Some(4312)), (2048, Some(8408)), (4096, Some(16600))]),
            row("658d3", "", 18, 514, &[(512, Some(2502)), (1024, None), (2048, None), (4096, None)]),
            row("446b7", "", 18, 42966, &[(512, Some(2358)), (1024, Some(4406)), (2048, Some(8502)), (4096, Some(16694))]),
            row("ad0b5", "", 19, 513, &[(512, Some(2994)), (1024, None), (2048, None), (4096, None)]),
            row("ae975", "", 19, 1028, &[(512, Some(2514)), (1024, Some(4562)), (2048, None), (4096, None)]),
            row("c492f", "", 19, 81915, &[(512, Some(2472)), (1024, Some(4520)), (2048, Some(8616)), (4096, Some(16808))]),
        ],
    },
    Table {
        id: 4,
        title: "Suggested CRC codes with 24 parity bits",
        targets: &[512, 1024, 2048, 4096, 8192],
        slow: true,
        rows: &[
            row("11175b7", "", 24, 1195740, &[(512, Some(3134)), (1024, Some(5330)), (2048, Some(9426)), (4096, Some(17618)), (8192, Some(34002))]),
            row("15d6dcb", "FlexRay", 24, 4094, &[(512, Some(3116)), (1024, Some(6188)), (2048, Some(12332)), (4096, None), (8192, None)]),
            row("1eb83af", "", 24, 4098, &[(512, Some(3014)), (1024, Some(6086)), (2048, Some(12230)), (4096, Some(20426)), (8192, None)]),
            row("1ce467f", "", 24, 8355585, &[(512, Some(3042)), (1024, Some(5708)), (2048, Some(9804)), (4096, Some(17996)), (8192, Some(34380))]),
            row("1864cfb", "5G", 24, 8388607, &[(512, Some(3014)), (1024, Some(5120)), (2048, Some(9216)), (4096, Some(17408)), (8192, Some(33792))]),
            row("1800063", "5G", 24, 8388607, &[(512, Some(1960)), (1024, Some(4008)), (2048, Some(8104)), (4096, Some(16296)), (8192, Some(32680))]),
            row("1b2b017", "5G", 24, 1168146, &[(512, Some(2366)), (1024, Some(4414)), (2048, Some(8510)), (4096, Some(16702)), (8192, Some(33086))]),
        ],
    },
];

/// Lengths of the distance bar chart comparing the 16-bit polynomials.
pub const FIGURE_LENGTHS: [usize; 5] = [24, 32, 64, 96, 128];

/// Bars per polynomial; `None` where no reference values exist.
pub const FIGURE_SERIES: &[(&str, Option<[u32; 5]>)] = &[
    ("1a2eb", Some([8, 6, 6, 6, 4])),
    ("11cc3", None),
    ("18005", Some([4, 4, 4, 4, 4])),
    ("11021", Some([4, 4, 4, 4, 4])),
];

#[derive(Clone, Debug, Serialize)]
pub struct RowCheck {
    pub table: u8,
    pub poly: Gf2Poly,
    pub label: &'static str,
    pub degree: u32,
    pub order: u64,
    pub expected_order: u64,
    /// `(M, computed, expected)`.
    pub scores: Vec<(usize, Cell, Cell)>,
}

impl RowCheck {
    pub fn ok(&self) -> bool {
        self.order == self.expected_order && self.scores.iter().all(|(_, got, want)| got == want)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureCheck {
    pub poly: Gf2Poly,
    pub distances: Vec<(usize, u32)>,
    pub expected: Option<[u32; 5]>,
}

impl FigureCheck {
    pub fn ok(&self) -> bool {
        match self.expected {
            Some(want) => self.distances.iter().map(|&(_, d)| d).eq(want),
            None => true,
        }
    }
}

pub fn check_table(table: &Table, cache: &ProfileCache) -> Result<Vec<RowCheck>> {
    table
        .rows
        .iter()
        .map(|row| {
            let poly = Gf2Poly::parse_hex(row.poly)?;
            let targets: Vec<usize> = row.scores.iter().map(|&(m, _)| m).collect();
            let result = cache.score_targets(poly, &targets)?;
            Ok(RowCheck {
                table: table.id,
                poly,
                label: row.label,
                degree: poly.degree(),
                order: result.order,
                expected_order: row.order,
                scores: row
                    .scores
                    .iter()
                    .map(|&(m, want)| (m, result.scores[&m], want))
                    .collect(),
            })
        })
        .collect()
}

pub fn check_figure(cache: &ProfileCache) -> Result<Vec<FigureCheck>> {
    let top = *FIGURE_LENGTHS.last().unwrap();
    FIGURE_SERIES
        .iter()
        .map(|&(hex, expected)| {
            let poly = Gf2Poly::parse_hex(hex)?;
            let profile = cache.get(poly, top)?;
            let distances = FIGURE_LENGTHS
                .iter()
                .map(|&n| (n, profile.distance_at(n).unwrap_or(2)))
                .collect();
            Ok(FigureCheck { poly, distances, expected })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_rows_are_consistent() {
        for table in TABLES {
            for row in table.rows {
                let g = Gf2Poly::parse_hex(row.poly).unwrap();
                assert_eq!(g.degree(), row.degree, "{}", row.poly);
                for &(m, cell) in row.scores {
                    // dash exactly when the order is below M
                    assert_eq!(cell.is_none(), row.order < m as u64, "{} at {m}", row.poly);
                }
            }
        }
    }

    #[test]
    fn figure_series() {
        let cache = ProfileCache::new();
        let checks = check_figure(&cache).unwrap();
        assert!(checks.iter().all(|c| c.ok()));
        assert_eq!(checks.len(), 4);
    }

    #[test]
    fn table_one_matches() {
        let cache = ProfileCache::new();
        let checks = check_table(&TABLES[0], &cache).unwrap();
        for c in &checks {
            assert!(c.ok(), "{c:?}");
        }
    }
}
