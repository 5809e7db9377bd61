//! Periodic rational-valued functions on `Z^d`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{Lattice, PeriodicSet, QuotientGroup};
use crate::point::{self, Point};

/// An `L`-periodic function `Z^d -> Q`, stored by its values on the canonical
/// residues of `L` (in the residue order of [`QuotientGroup`]).
#[derive(Clone)]
pub struct PeriodicFunction {
    quotient: QuotientGroup,
    values: Vec<BigRational>,
}

impl PartialEq for PeriodicFunction {
    fn eq(&self, other: &Self) -> bool {
        self.lattice() == other.lattice() && self.values == other.values
    }
}

impl Eq for PeriodicFunction {}

impl fmt::Debug for PeriodicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicFunction({} : [", self.lattice())?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "])")
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl PeriodicFunction {
    pub fn new(lattice: &Lattice, values: Vec<BigRational>) -> Result<PeriodicFunction> {
        let quotient = lattice.quotient()?;
        if values.len() != quotient.order() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, found {}",
                quotient.order(),
                values.len()
            )));
        }
        Ok(PeriodicFunction { quotient, values })
    }

    pub fn from_quotient(quotient: QuotientGroup, values: Vec<BigRational>) -> PeriodicFunction {
        assert_eq!(values.len(), quotient.order());
        PeriodicFunction { quotient, values }
    }

    /// Tabulates `f` on the residues of `lattice`.
    pub fn from_fn(lattice: &Lattice, f: impl Fn(&[i64]) -> BigRational) -> Result<PeriodicFunction> {
        let quotient = lattice.quotient()?;
        let values = quotient.residues().map(|r| f(&r)).collect();
        Ok(PeriodicFunction { quotient, values })
    }

    pub fn constant(dim: usize, c: BigRational) -> PeriodicFunction {
        let quotient = Lattice::full(dim).quotient().expect("trivial quotient");
        PeriodicFunction { quotient, values: vec![c] }
    }

    pub fn indicator(set: &PeriodicSet) -> PeriodicFunction {
        let quotient = set.lattice().quotient().expect("periodic sets have enumerable quotients");
        let mut values = vec![BigRational::zero(); quotient.order()];
        for m in set.members() {
            values[quotient.index_of(m)] = BigRational::one();
        }
        PeriodicFunction { quotient, values }
    }

    pub fn lattice(&self) -> &Lattice {
        self.quotient.lattice()
    }

    pub fn quotient(&self) -> &QuotientGroup {
        &self.quotient
    }

    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    /// Values in residue order.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn at(&self, x: &[i64]) -> &BigRational {
        &self.values[self.quotient.index_of(x)]
    }

    /// The same function presented on a sublattice of its lattice.
    pub fn refine(&self, sub: &Lattice) -> Result<PeriodicFunction> {
        check_dim(self.dim(), sub.dim())?;
        if !self.lattice().contains_lattice(sub) {
            return Err(Error::InvalidInput(format!("{sub} is not a sublattice of {}", self.lattice())));
        }
        if sub == self.lattice() {
            return Ok(self.clone());
        }
        PeriodicFunction::from_fn(sub, |x| self.at(x).clone())
    }

    /// Both functions presented on the intersection of their lattices.
    pub fn common(&self, other: &PeriodicFunction) -> Result<(PeriodicFunction, PeriodicFunction)> {
        let l = self.lattice().intersect(other.lattice())?;
        Ok((self.refine(&l)?, other.refine(&l)?))
    }

    fn zip_with(
        &self,
        other: &PeriodicFunction,
        op: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<PeriodicFunction> {
        let (a, b) = self.common(other)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| op(x, y)).collect();
        Ok(PeriodicFunction { quotient: a.quotient, values })
    }

    pub fn add(&self, other: &PeriodicFunction) -> Result<PeriodicFunction> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &PeriodicFunction) -> Result<PeriodicFunction> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn map(&self, op: impl Fn(&BigRational) -> BigRational) -> PeriodicFunction {
        PeriodicFunction { quotient: self.quotient.clone(), values: self.values.iter().map(op).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> PeriodicFunction {
        self.map(|x| x * k)
    }

    /// `x -> f(x - v)`.
    pub fn shift(&self, v: &[i64]) -> PeriodicFunction {
        let values = (0..self.quotient.order())
            .map(|i| self.at(&point::sub(&self.quotient.residue(i), v)).clone())
            .collect();
        PeriodicFunction { quotient: self.quotient.clone(), values }
    }

    pub fn min(&self) -> BigRational {
        self.values.iter().min().cloned().expect("quotients are non-empty")
    }

    pub fn max(&self) -> BigRational {
        self.values.iter().max().cloned().expect("quotients are non-empty")
    }

    /// Average over a fundamental domain, which equals the limit of box averages.
    pub fn mean(&self) -> BigRational {
        let total: BigRational = self.values.iter().sum();
        total / rat(self.values.len() as i64)
    }

    pub fn is_integer_valued(&self) -> bool {
        self.values.iter().all(|v| v.is_integer())
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }

    /// Whether `f(x + s) = f(x)` for all `x`.
    pub fn is_invariant_under(&self, s: &[i64]) -> bool {
        (0..self.quotient.order()).all(|i| self.values[self.quotient.shift(i, s)] == self.values[i])
    }

    /// The full group of periods `{v : f(x + v) = f(x) for all x}`.
    pub fn stabilizer(&self) -> Lattice {
        let d = self.dim();
        let mut periods = self.lattice().clone();
        let base = &self.values[0];
        for i in 1..self.quotient.order() {
            if self.values[i] != *base {
                continue;
            }
            let s = self.quotient.residue(i);
            if !periods.contains(&s) && self.is_invariant_under(&s) {
                let mut gens = periods.basis_points().expect("small lattice");
                gens.push(s);
                periods = Lattice::from_points(d, &gens).expect("same dimension");
            }
        }
        periods
    }

    /// The same function presented on its full stabilizer.
    pub fn canonical(&self) -> PeriodicFunction {
        let stab = self.stabilizer();
        PeriodicFunction::from_fn(&stab, |x| self.at(x).clone()).expect("stabilizer has finite index")
    }

    /// Equality as functions on `Z^d`.
    pub fn same_function(&self, other: &PeriodicFunction) -> bool {
        match self.common(other) {
            Ok((a, b)) => a.values == b.values,
            Err(_) => false,
        }
    }

    /// The set where the function equals 1; errors unless 0/1-valued.
    pub fn to_set(&self) -> Result<PeriodicSet> {
        let mut idx = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            if v.is_one() {
                idx.push(i);
            } else if !v.is_zero() {
                return Err(Error::InvalidInput(format!("value {v} is not 0 or 1")));
            }
        }
        Ok(PeriodicSet::from_indices(&self.quotient, idx))
    }

    /// Points of the fundamental domain paired with their values.
    pub fn entries(&self) -> impl Iterator<Item = (Point, &BigRational)> {
        self.values.iter().enumerate().map(|(i, v)| (self.quotient.residue(i), v))
    }
}
