"""mixgrowth: growth sequences of bi-Lipschitz maps vs. their rate of mixing.

Subpackages by concern:

* ``cfrac``        exact continued fractions, the coupled denominator ladder
* ``toruslab``     cocycle series on the 3-torus, certified norms, mixing integrals
* ``subshift``     substitutions, the Rudin-Shapiro shift, window metric spaces
* ``metricspace``  nets, covering numbers, box dimension, capacity inversions
* ``bounds``       adjoint sequences and the theorem-level bound evaluators
* ``cli``          the ``mixgrowth`` experiment runner
"""

__version__ = "0.1.0"
