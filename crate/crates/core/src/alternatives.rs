//! Samplers for the alternative laws used in power studies.
//!
//! Descriptors follow `name:p1,p2,...`, e.g. `mkdu:4,0.5,1,0.25`. In every
//! two-component mixture, `eps` is the probability of the first-named
//! component.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::family::{FamilySpec, FittedParams};
use crate::pmf::Sampler;
use crate::sample::{CountSample, MAX_COUNT_VALUE};

pub const GRAMMAR: &str = "alternative descriptors: bb:v,a | du:nu | mpdu:nu,eps | \
mpbdu:lambda,v,p,nu,eps | pb:lambda,v,p | nb:v,p | mkdu:lambda,theta,nu,eps | \
mkp:lambda,theta,nu,eps | mnbp:lambda,p,nu,eps | maxkdu:lambda,theta,nu | poisson:lambda | \
katz:lambda,theta | pp:lambda,theta";

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AlternativeSpec {
    /// Binomial(v, p) with p ~ Beta(a, a).
    BetaBinomial {
        v: u32,
        a: f64,
    },
    /// Uniform on {0, ..., nu}.
    DiscreteUniform {
        nu: u32,
    },
    /// Poisson(1) with probability eps, else DU(nu).
    MixPoissonUniform {
        nu: u32,
        eps: f64,
    },
    /// PB(lambda, v, p) with probability eps, else DU(nu).
    MixPoissonBinomialUniform {
        lambda: f64,
        v: u32,
        p: f64,
        nu: u32,
        eps: f64,
    },
    /// Poisson(lambda)-stopped sum of Binomial(v, p).
    PoissonBinomial {
        lambda: f64,
        v: u32,
        p: f64,
    },
    /// Failures before `v` successes, success probability `p`.
    NegBinomial {
        v: f64,
        p: f64,
    },
    /// Katz(lambda, theta) with probability eps, else DU(nu).
    MixKatzUniform {
        lambda: f64,
        theta: f64,
        nu: u32,
        eps: f64,
    },
    /// Katz(lambda, theta) with probability eps, else Poisson(nu).
    MixKatzPoisson {
        lambda: f64,
        theta: f64,
        nu: f64,
        eps: f64,
    },
    /// NB(lambda, p) with probability eps, else Poisson(nu).
    MixNegBinomialPoisson {
        lambda: f64,
        p: f64,
        nu: f64,
        eps: f64,
    },
    /// max(Katz(lambda, theta), DU(nu)).
    MaxKatzUniform {
        lambda: f64,
        theta: f64,
        nu: u32,
    },
    Poisson {
        lambda: f64,
    },
    /// A member of one of the null families.
    NullFamily {
        spec: FamilySpec,
        params: FittedParams,
    },
}

fn check(cond: bool, what: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(what))
    }
}

fn is_prob(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

fn is_eps(e: f64) -> bool {
    (0.0..=1.0).contains(&e)
}

fn is_rate(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        use AlternativeSpec::*;
        match *self {
            BetaBinomial { v, a } => {
                check(v >= 1, "bb: v must be >= 1")?;
                check(is_rate(a), "bb: a must be positive")
            }
            DiscreteUniform { .. } => Ok(()),
            MixPoissonUniform { eps, .. } => check(is_eps(eps), "mpdu: eps must lie in [0, 1]"),
            MixPoissonBinomialUniform {
                lambda, v, p, eps, ..
            } => {
                check(is_rate(lambda), "mpbdu: lambda must be positive")?;
                check(v >= 1, "mpbdu: v must be >= 1")?;
                check(is_prob(p), "mpbdu: p must lie in (0, 1)")?;
                check(is_eps(eps), "mpbdu: eps must lie in [0, 1]")
            }
            PoissonBinomial { lambda, v, p } => {
                check(is_rate(lambda), "pb: lambda must be positive")?;
                check(v >= 1, "pb: v must be >= 1")?;
                check(is_prob(p), "pb: p must lie in (0, 1)")
            }
            NegBinomial { v, p } => {
                check(is_rate(v), "nb: v must be positive")?;
                check(is_prob(p), "nb: p must lie in (0, 1)")
            }
            MixKatzUniform {
                lambda, theta, eps, ..
            } => {
                FamilySpec::Katz.validate(&FittedParams::new(lambda, theta))?;
                check(is_eps(eps), "mkdu: eps must lie in [0, 1]")
            }
            MixKatzPoisson {
                lambda,
                theta,
                nu,
                eps,
            } => {
                FamilySpec::Katz.validate(&FittedParams::new(lambda, theta))?;
                check(is_rate(nu), "mkp: nu must be positive")?;
                check(is_eps(eps), "mkp: eps must lie in [0, 1]")
            }
            MixNegBinomialPoisson { lambda, p, nu, eps } => {
                check(is_rate(lambda), "mnbp: lambda must be positive")?;
                check(is_prob(p), "mnbp: p must lie in (0, 1)")?;
                check(is_rate(nu), "mnbp: nu must be positive")?;
                check(is_eps(eps), "mnbp: eps must lie in [0, 1]")
            }
            MaxKatzUniform { lambda, theta, .. } => {
                FamilySpec::Katz.validate(&FittedParams::new(lambda, theta))
            }
            Poisson { lambda } => check(is_rate(lambda), "poisson: lambda must be positive"),
            NullFamily { spec, params } => spec.validate(&params),
        }
    }

    /// Prepares the component distributions once so that many draws can
    /// share them.
    pub fn sampler(&self) -> Result<AltSampler> {
        use AlternativeSpec::*;
        self.validate()?;
        let katz = |lambda, theta| -> Result<Component> {
            Ok(Component::Gp(Sampler::new(
                FamilySpec::Katz,
                &FittedParams::new(lambda, theta),
            )?))
        };
        let shape = match *self {
            BetaBinomial { v, a } => Shape::Single(Component::beta_binomial(v, a)?),
            DiscreteUniform { nu } => Shape::Single(Component::Uniform(nu as u64)),
            MixPoissonUniform { nu, eps } => Shape::Mixture {
                eps,
                first: Component::poisson(1.0)?,
                second: Component::Uniform(nu as u64),
            },
            MixPoissonBinomialUniform {
                lambda,
                v,
                p,
                nu,
                eps,
            } => Shape::Mixture {
                eps,
                first: Component::poisson_binomial(lambda, v, p)?,
                second: Component::Uniform(nu as u64),
            },
            PoissonBinomial { lambda, v, p } => {
                Shape::Single(Component::poisson_binomial(lambda, v, p)?)
            }
            NegBinomial { v, p } => Shape::Single(Component::neg_binomial(v, p)?),
            MixKatzUniform {
                lambda,
                theta,
                nu,
                eps,
            } => Shape::Mixture {
                eps,
                first: katz(lambda, theta)?,
                second: Component::Uniform(nu as u64),
            },
            MixKatzPoisson {
                lambda,
                theta,
                nu,
                eps,
            } => Shape::Mixture {
                eps,
                first: katz(lambda, theta)?,
                second: Component::poisson(nu)?,
            },
            MixNegBinomialPoisson { lambda, p, nu, eps } => Shape::Mixture {
                eps,
                first: Component::neg_binomial(lambda, p)?,
                second: Component::poisson(nu)?,
            },
            MaxKatzUniform { lambda, theta, nu } => Shape::Max {
                first: katz(lambda, theta)?,
                second: Component::Uniform(nu as u64),
            },
            Poisson { lambda } => Shape::Single(Component::poisson(lambda)?),
            NullFamily { spec, params } => {
                Shape::Single(Component::Gp(Sampler::new(spec, &params)?))
            }
        };
        Ok(AltSampler { shape })
    }
}

#[derive(Debug, Clone)]
enum Component {
    Uniform(u64),
    Poisson(Poisson<f64>),
    /// Binomial(v, p) with p = G1/(G1+G2), G1, G2 ~ Gamma(a, 1).
    BetaBinomial {
        v: u64,
        gamma: Gamma<f64>,
    },
    /// Poisson(G) with G ~ Gamma(v, (1-p)/p).
    NegBinomial {
        gamma: Gamma<f64>,
    },
    /// Binomial(N v, p) with N ~ Poisson(lambda): the Poisson-stopped sum
    /// of N Binomial(v, p) terms.
    PoissonBinomial {
        count: Poisson<f64>,
        v: u64,
        p: f64,
    },
    Gp(Sampler),
}

fn distr_err<E>(_: E) -> Error {
    Error::Domain("invalid parameter for component distribution")
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as u64,
        Err(_) => 0,
    }
}

impl Component {
    fn poisson(lambda: f64) -> Result<Self> {
        Ok(Component::Poisson(Poisson::new(lambda).map_err(distr_err)?))
    }

    fn beta_binomial(v: u32, a: f64) -> Result<Self> {
        Ok(Component::BetaBinomial {
            v: v as u64,
            gamma: Gamma::new(a, 1.0).map_err(distr_err)?,
        })
    }

    fn neg_binomial(v: f64, p: f64) -> Result<Self> {
        Ok(Component::NegBinomial {
            gamma: Gamma::new(v, (1.0 - p) / p).map_err(distr_err)?,
        })
    }

    fn poisson_binomial(lambda: f64, v: u32, p: f64) -> Result<Self> {
        Ok(Component::PoissonBinomial {
            count: Poisson::new(lambda).map_err(distr_err)?,
            v: v as u64,
            p,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Component::Uniform(nu) => rng.random_range(0..=*nu),
            Component::Poisson(d) => d.sample(rng) as u64,
            Component::BetaBinomial { v, gamma } => {
                let g1 = gamma.sample(rng);
                let g2 = gamma.sample(rng);
                let total = g1 + g2;
                let p = if total > 0.0 { g1 / total } else { 0.5 };
                binomial_draw(*v, p, rng)
            }
            Component::NegBinomial { gamma } => poisson_draw(gamma.sample(rng), rng),
            Component::PoissonBinomial { count, v, p } => {
                let n = count.sample(rng) as u64;
                binomial_draw(n * v, *p, rng)
            }
            Component::Gp(s) => s.draw(rng),
        }
    }
}

fn binomial_draw<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 {
        return 0;
    }
    match Binomial::new(n, p.clamp(0.0, 1.0)) {
        Ok(d) => d.sample(rng),
        Err(_) => 0,
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Single(Component),
    Mixture {
        eps: f64,
        first: Component,
        second: Component,
    },
    Max {
        first: Component,
        second: Component,
    },
}

/// Prepared sampler for an [`AlternativeSpec`].
#[derive(Debug, Clone)]
pub struct AltSampler {
    shape: Shape,
}

impl AltSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.shape {
            Shape::Single(c) => c.draw(rng),
            Shape::Mixture { eps, first, second } => {
                let u: f64 = rng.random();
                if u < *eps {
                    first.draw(rng)
                } else {
                    second.draw(rng)
                }
            }
            Shape::Max { first, second } => {
                let a = first.draw(rng);
                let b = second.draw(rng);
                a.max(b)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CountSample> {
        if n == 0 {
            return Err(Error::Precondition("sample size must be at least 1"));
        }
        let mut freq: Vec<u64> = Vec::with_capacity(64);
        for _ in 0..n {
            let k = self.draw(rng).min(MAX_COUNT_VALUE) as usize;
            if k >= freq.len() {
                freq.resize(k + 1, 0);
            }
            freq[k] += 1;
        }
        Ok(CountSample::from_freq_unchecked(freq, n as u64))
    }
}

/// Draws `n` iid observations from `alt`.
pub fn sample_alt<R: Rng + ?Sized>(
    alt: &AlternativeSpec,
    n: usize,
    rng: &mut R,
) -> Result<CountSample> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1"));
    }
    alt.sampler()?.sample(n, rng)
}

impl fmt::Display for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AlternativeSpec::*;
        match *self {
            BetaBinomial { v, a } => write!(f, "bb:{v},{a}"),
            DiscreteUniform { nu } => write!(f, "du:{nu}"),
            MixPoissonUniform { nu, eps } => write!(f, "mpdu:{nu},{eps}"),
            MixPoissonBinomialUniform {
                lambda,
                v,
                p,
                nu,
                eps,
            } => {
                write!(f, "mpbdu:{lambda},{v},{p},{nu},{eps}")
            }
            PoissonBinomial { lambda, v, p } => write!(f, "pb:{lambda},{v},{p}"),
            NegBinomial { v, p } => write!(f, "nb:{v},{p}"),
            MixKatzUniform {
                lambda,
                theta,
                nu,
                eps,
            } => write!(f, "mkdu:{lambda},{theta},{nu},{eps}"),
            MixKatzPoisson {
                lambda,
                theta,
                nu,
                eps,
            } => write!(f, "mkp:{lambda},{theta},{nu},{eps}"),
            MixNegBinomialPoisson { lambda, p, nu, eps } => {
                write!(f, "mnbp:{lambda},{p},{nu},{eps}")
            }
            MaxKatzUniform { lambda, theta, nu } => write!(f, "maxkdu:{lambda},{theta},{nu}"),
            Poisson { lambda } => write!(f, "poisson:{lambda}"),
            NullFamily { spec, params } => match spec {
                FamilySpec::Katz => write!(f, "katz:{},{}", params.lambda, params.theta),
                FamilySpec::PoissonPoisson => write!(f, "pp:{},{}", params.lambda, params.theta),
                FamilySpec::PoissonBinomial { nu } => {
                    write!(f, "pb:{},{},{}", params.lambda, nu, params.theta)
                }
            },
        }
    }
}

struct Args<'a> {
    name: &'a str,
    raw: Vec<&'a str>,
}

impl<'a> Args<'a> {
    fn expect(&self, n: usize) -> Result<()> {
        if self.raw.len() == n {
            Ok(())
        } else {
            Err(parse_err(format!(
                "`{}` takes {n} parameters, got {}",
                self.name,
                self.raw.len()
            )))
        }
    }

    fn real(&self, i: usize) -> Result<f64> {
        self.raw[i]
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                parse_err(format!(
                    "`{}`: `{}` is not a number",
                    self.name, self.raw[i]
                ))
            })
    }

    fn int(&self, i: usize) -> Result<u32> {
        self.raw[i].parse::<u32>().map_err(|_| {
            parse_err(format!(
                "`{}`: `{}` is not a nonnegative integer",
                self.name, self.raw[i]
            ))
        })
    }
}

fn parse_err(msg: String) -> Error {
    Error::Parse(format!("{msg}; {GRAMMAR}"))
}

impl FromStr for AlternativeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use AlternativeSpec::*;
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim();
        let lower: String = name.to_ascii_lowercase();
        let raw: Vec<&str> = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',').map(str::trim).collect()
        };
        let a = Args { name, raw };
        let alt = match lower.as_str() {
            "bb" => {
                a.expect(2)?;
                BetaBinomial {
                    v: a.int(0)?,
                    a: a.real(1)?,
                }
            }
            "du" => {
                a.expect(1)?;
                DiscreteUniform { nu: a.int(0)? }
            }
            "mpdu" => {
                a.expect(2)?;
                MixPoissonUniform {
                    nu: a.int(0)?,
                    eps: a.real(1)?,
                }
            }
            "mpbdu" => {
                a.expect(5)?;
                MixPoissonBinomialUniform {
                    lambda: a.real(0)?,
                    v: a.int(1)?,
                    p: a.real(2)?,
                    nu: a.int(3)?,
                    eps: a.real(4)?,
                }
            }
            "pb" => {
                a.expect(3)?;
                PoissonBinomial {
                    lambda: a.real(0)?,
                    v: a.int(1)?,
                    p: a.real(2)?,
                }
            }
            "nb" => {
                a.expect(2)?;
                NegBinomial {
                    v: a.real(0)?,
                    p: a.real(1)?,
                }
            }
            "mkdu" => {
                a.expect(4)?;
                MixKatzUniform {
                    lambda: a.real(0)?,
                    theta: a.real(1)?,
                    nu: a.int(2)?,
                    eps: a.real(3)?,
                }
            }
            "mkp" => {
                a.expect(4)?;
                MixKatzPoisson {
                    lambda: a.real(0)?,
                    theta: a.real(1)?,
                    nu: a.real(2)?,
                    eps: a.real(3)?,
                }
            }
            "mnbp" => {
                a.expect(4)?;
                MixNegBinomialPoisson {
                    lambda: a.real(0)?,
                    p: a.real(1)?,
                    nu: a.real(2)?,
                    eps: a.real(3)?,
                }
            }
            "maxkdu" => {
                a.expect(3)?;
                MaxKatzUniform {
                    lambda: a.real(0)?,
                    theta: a.real(1)?,
                    nu: a.int(2)?,
                }
            }
            "poisson" | "p" => {
                a.expect(1)?;
                Poisson { lambda: a.real(0)? }
            }
            "katz" => {
                a.expect(2)?;
                NullFamily {
                    spec: FamilySpec::Katz,
                    params: FittedParams::new(a.real(0)?, a.real(1)?),
                }
            }
            "pp" => {
                a.expect(2)?;
                NullFamily {
                    spec: FamilySpec::PoissonPoisson,
                    params: FittedParams::new(a.real(0)?, a.real(1)?),
                }
            }
            _ => return Err(parse_err(format!("unknown alternative `{name}`"))),
        };
        alt.validate()
            .map_err(|e| parse_err(format!("invalid parameters in `{s}`: {e}")))?;
        Ok(alt)
    }
}
