# tnnflag: exact combinatorics and loop-group computations for totally nonnegative Grassmannians
__version__ = "0.1.0"
