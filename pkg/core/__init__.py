# Numeric core: special functions, mixed laws, closed forms, quadrature oracle, Monte Carlo
