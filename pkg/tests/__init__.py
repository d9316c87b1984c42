# tnnflag tests
