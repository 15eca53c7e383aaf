"""Dynamic generalized linear models with conjugate updating."""
