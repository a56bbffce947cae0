"""defsum - deferred Cesaro means, sigma_p^q[s] spaces and conullity criteria for summability domains."""

__version__ = "0.1.0"
__author__ = "defsum developers"
