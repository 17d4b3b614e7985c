DEFAULT_SEED = 1985  # used whenever --seed is not given

DEFAULT_DT = 1e-3  # grid step of simulated rate paths, time units
THINNING_MARGIN = 1.5  # dominating rate = margin * max grid rate of the interval

MIN_MC_SAMPLES = 100
REPLICATE_CHUNK = 1000  # replicates per random stream in simulation experiments

ROW_SUM_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-10
FREQ_SUM_TOL = 1e-9
REVERSIBILITY_TOL = 1e-9
ZERO_EIGENVALUE_TOL = 1e-10

DNA_ALPHABET = 'ACGT'
UNKNOWN_SYMBOLS = '-?'
DNA_UNKNOWN_SYMBOLS = '-?N'

WORKERS_ENV = 'CIR_RATES_WORKERS'
