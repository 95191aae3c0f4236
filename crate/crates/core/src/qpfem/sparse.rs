use num_complex::Complex64;

/// Compressed sparse rows with duplicates summed in a fixed order.
#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        // stable sort keeps the summation order of duplicates deterministic
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len() / 2);
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len() / 2);
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_start[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        Self {
            n,
            row_start,
            cols,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_start[r]..self.row_start[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.row_start[r]..self.row_start[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mul_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out += acc;
        }
    }
}
