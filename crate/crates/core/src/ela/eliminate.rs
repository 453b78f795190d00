use crate::error::{invalid, Error, Result};
use crate::table::FeatureTable;

/// Columns that survive elimination, as indices into the original table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMask {
    pub keep: Vec<usize>,
    pub original_width: usize,
}

impl ColumnMask {
    /// Drop every column that has a missing value or a single distinct
    /// value among `rows`.
    pub fn fit(table: &FeatureTable, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("cannot compute an elimination mask from zero rows"));
        }
        let keep: Vec<usize> = (0..table.n_cols())
            .filter(|&j| {
                let first = table.row(rows[0])[j];
                let mut varies = false;
                for &i in rows {
                    let v = table.row(i)[j];
                    if v.is_nan() {
                        return false;
                    }
                    varies |= v != first;
                }
                varies
            })
            .collect();
        if keep.is_empty() {
            return Err(Error::AllColumnsRemoved);
        }
        Ok(Self {
            keep,
            original_width: table.n_cols(),
        })
    }

    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        if table.n_cols() != self.original_width {
            return Err(invalid(format!(
                "mask built for {} columns applied to {}",
                self.original_width,
                table.n_cols()
            )));
        }
        Ok(table.select_columns(&self.keep))
    }

    /// Spread values over the surviving columns back to the original width,
    /// filling eliminated positions with zero.
    pub fn expand(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.original_width];
        for (&j, &v) in self.keep.iter().zip(values) {
            out[j] = v;
        }
        out
    }
}

/// Eliminate over all rows of `table`.
pub fn eliminate_features(table: &FeatureTable) -> Result<(FeatureTable, ColumnMask)> {
    if table.n_rows() == 0 {
        return Err(invalid("cannot eliminate features of an empty table"));
    }
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    let mask = ColumnMask::fit(table, &rows)?;
    Ok((mask.apply(table)?, mask))
}
