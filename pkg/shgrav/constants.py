# Physical and numerical constants shared across the pipeline

G_DEFAULT = 6.67430e-11  # m^3 kg^-1 s^-2 (CODATA 2018)
MGAL = 1e-5  # m/s^2

# Legendre derivative refuses |phi| within this of +-pi/2
EPS_POLE = 1e-10
# Field evaluation switches to the z-axis limit below eta/r = POLE_GUARD
POLE_GUARD = 1e-9

# Tetrahedra per work unit; fixed so reductions do not depend on thread count
CHUNK_SIZE = 256
# Monte-Carlo samples per seeded substream
MC_BATCH = 1 << 16

# Exact factorials below this degree, log-gamma above
EXACT_FACTORIAL_MAX = 20

# Below this distance a query coincides with a mascon
MASCON_SINGULAR_DISTANCE = 1e-6

SHMODEL_FORMAT_VERSION = 1
