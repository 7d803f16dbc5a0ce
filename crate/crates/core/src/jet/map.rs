use std::sync::Arc;

use super::{Ambient, DeltaPoly, JetError, JetVariable};

/// What a ring map does to coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientMap {
    Identity,
    /// `phi^n` on coefficients.
    Frobenius(usize),
}

impl CoefficientMap {
    fn power(self) -> usize {
        match self {
            CoefficientMap::Identity => 0,
            CoefficientMap::Frobenius(n) => n,
        }
    }

    fn from_power(n: usize) -> Self {
        if n == 0 {
            CoefficientMap::Identity
        } else {
            CoefficientMap::Frobenius(n)
        }
    }
}

/// A substitution homomorphism from `source` to `target`, given on generators.
#[derive(Debug, Clone)]
pub struct RingMapSpec {
    source: Arc<Ambient>,
    target: Arc<Ambient>,
    images: Vec<Option<DeltaPoly>>,
    coefficients: CoefficientMap,
}

impl RingMapSpec {
    /// A map with no generator assigned yet.
    pub fn new(source: &Arc<Ambient>, target: &Arc<Ambient>, coefficients: CoefficientMap) -> Self {
        RingMapSpec {
            source: source.clone(),
            target: target.clone(),
            images: vec![None; source.vars().len()],
            coefficients,
        }
    }

    /// Every source variable to the same variable of `target`.
    pub fn inclusion(source: &Arc<Ambient>, target: &Arc<Ambient>) -> Result<Self, JetError> {
        let k = target.ring().k();
        let mut spec = Self::new(source, target, CoefficientMap::Identity);
        for i in 0..source.vars().len() {
            let img = DeltaPoly::var(target, &source.vars()[i], k)?;
            spec.images[i] = Some(img);
        }
        Ok(spec)
    }

    pub fn identity(amb: &Arc<Ambient>) -> Self {
        Self::inclusion(amb, amb).expect("every variable occurs in its own ambient")
    }

    pub fn source(&self) -> &Arc<Ambient> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Ambient> {
        &self.target
    }

    pub fn coefficients(&self) -> CoefficientMap {
        self.coefficients
    }

    /// Sends the `i`-th source variable to `image`.
    pub fn assign_at(mut self, i: usize, image: DeltaPoly) -> Result<Self, JetError> {
        let image = image.embed(&self.target)?;
        self.images[i] = Some(image);
        Ok(self)
    }

    pub fn assign(self, v: &JetVariable, image: DeltaPoly) -> Result<Self, JetError> {
        let i = self
            .source
            .index_of(v)
            .ok_or_else(|| JetError::UnboundVariable(v.display_with(self.source.base_names())))?;
        self.assign_at(i, image)
    }

    /// Sends source variable `i` to target variable `j`.
    pub fn send(self, i: usize, j: usize) -> Self {
        let k = self.target.ring().k();
        let img = DeltaPoly::var_at(&self.target, j, k);
        self.assign_at(i, img).expect("variable images live in the target")
    }

    pub fn image(&self, i: usize) -> Option<&DeltaPoly> {
        self.images[i].as_ref()
    }

    /// The image of `f`, computed by substituting generator images.
    // trace: apply_map | ring maps of the jet square | left_vertical_sends_mixed_jet_to_second_jet | min(prec f, prec images)
    pub fn apply(&self, f: &DeltaPoly) -> Result<DeltaPoly, JetError> {
        let f = if Arc::ptr_eq(f.ambient(), &self.source) { f.clone() } else { f.embed(&self.source)? };
        let ring = self.target.ring();
        let twist = self.coefficients.power();
        let mut powers: Vec<Vec<DeltaPoly>> = vec![Vec::new(); self.images.len()];
        let mut out = DeltaPoly::zero(&self.target, f.prec());
        for (m, c) in f.terms() {
            let c = ring.frobenius_iter(c, twist);
            let mut term = DeltaPoly::constant(&self.target, &c);
            for (i, slot) in powers.iter_mut().enumerate() {
                let e = m.0[i] as usize;
                if e == 0 {
                    continue;
                }
                let img = self.images[i].as_ref().ok_or_else(|| JetError::UnboundVariable(self.source.var_name(i)))?;
                if slot.is_empty() {
                    slot.push(DeltaPoly::from_int(&self.target, 1, img.prec()));
                    slot.push(img.clone());
                }
                while slot.len() <= e {
                    let next = slot.last().unwrap().mul(img);
                    slot.push(next);
                }
                term = term.mul(&slot[e]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &RingMapSpec) -> Result<RingMapSpec, JetError> {
        let mut images = Vec::with_capacity(self.images.len());
        for img in &self.images {
            images.push(match img {
                Some(g) => Some(next.apply(g)?),
                None => None,
            });
        }
        Ok(RingMapSpec {
            source: self.source.clone(),
            target: next.target.clone(),
            images,
            coefficients: CoefficientMap::from_power(self.coefficients.power() + next.coefficients.power()),
        })
    }
}
