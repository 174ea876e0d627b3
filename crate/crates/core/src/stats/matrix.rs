use super::{Result, StatsError};

/// Dense row-major matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl Matrix {
    /// Builds a matrix from row-major values. Columns are named `x0`, `x1`, ...
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(StatsError::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(StatsError::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::Domain(format!(
                "non-finite entry at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        let names = (0..cols).map(|j| format!("x{j}")).collect();
        Ok(Self { rows, cols, values, names })
    }

    /// Builds a matrix from named columns of equal length.
    pub fn from_columns<S: AsRef<str>>(columns: &[(S, &[f64])]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.1.len());
        if let Some((name, col)) = columns.iter().find(|c| c.1.len() != rows) {
            return Err(StatsError::Dimension(format!(
                "column {} has {} rows, expected {rows}",
                name.as_ref(),
                col.len()
            )));
        }
        let cols = columns.len();
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            values.extend(columns.iter().map(|c| c.1[i]));
        }
        let mut m = Self::new(rows, cols, values)?;
        m.names = columns.iter().map(|c| c.0.as_ref().to_string()).collect();
        Ok(m)
    }

    /// Design matrix with a leading intercept column followed by `columns`.
    pub fn with_intercept<S: AsRef<str>>(rows: usize, columns: &[(S, &[f64])]) -> Result<Self> {
        let ones = vec![1.0; rows];
        let mut all: Vec<(&str, &[f64])> = vec![("intercept", &ones)];
        all.extend(columns.iter().map(|(n, c)| (n.as_ref(), *c)));
        Self::from_columns(&all)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.cols {
            return Err(StatsError::Dimension(format!(
                "{} names for {} columns",
                names.len(),
                self.cols
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns a copy with one more named column appended on the right.
    pub fn append_column(&self, name: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.rows {
            return Err(StatsError::Dimension(format!(
                "column {name} has {} rows, expected {}",
                column.len(),
                self.rows
            )));
        }
        let mut values = Vec::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            values.extend_from_slice(self.row(i));
            values.push(column[i]);
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        Self::new(self.rows, self.cols + 1, values)?.with_names(names)
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.cols, values)?.with_names(self.names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_values() {
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        let m = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.column(1), vec![2.0, 4.0]);
    }

    #[test]
    fn intercept_design_layout() {
        let x = [5.0, 6.0, 7.0];
        let m = Matrix::with_intercept(3, &[("x", &x[..])]).unwrap();
        assert_eq!(m.names(), &["intercept".to_string(), "x".to_string()]);
        assert_eq!(m.row(2), &[1.0, 7.0]);
        let m2 = m.append_column("z", &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(m2.cols(), 3);
        assert_eq!(m2.names()[2], "z");
        assert!(Matrix::from_columns(&[("a", &[1.0, 2.0][..]), ("b", &[1.0][..])]).is_err());
    }
}
