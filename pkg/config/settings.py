"""
Configuración por defecto para Ramiflow
"""

# Tolerancias geométricas
SNAP_TOLERANCE = 1e-9       # Átomos/vértices a menos de esto se consideran el mismo punto
COLLINEAR_TOLERANCE = 1e-12  # |d1 x d2| < tol * |d1| * |d2| => colineales

# Tolerancias de masa
RESIDUAL_TOLERANCE = 1e-9   # Relativa a la masa total (conservación de Kirchhoff)
MASS_BALANCE_TOLERANCE = 1e-9
WEIGHT_EPSILON = 1e-14      # Pesos por debajo de esto se descartan en las descomposiciones

# Verificaciones muestreadas de costos
PROPERTY_GRID_POINTS = 256  # Puntos logarítmicos en (0, PROPERTY_GRID_MAX]
PROPERTY_GRID_MAX = 2.0
PROPERTY_GRID_MIN = 1e-6

# Admisibilidad
ADMISSIBILITY_SERIES_CUTOFF = 40
ADMISSIBILITY_RATIO_MARGIN = 1e-6

# Construcciones n-ádicas
MOLLIFIER_POINTS_PER_AXIS = 3  # 3^n átomos por átomo original

# Distancia
TRIANGLE_SLACK = 0.05       # Holgura relativa de la prueba de desigualdad triangular
DEFAULT_NADIC_LEVEL = 4

# Optimizador
OPTIMIZER_RESTARTS = 4
OPTIMIZER_MAX_ITERATIONS = 60
DESCENT_MAX_ITERATIONS = 400
DESCENT_STEP = 1e-6          # Paso de diferencias centrales
DESCENT_GRADIENT_TOLERANCE = 1e-11
ARMIJO_CONSTANT = 1e-4
ACCEPT_HYSTERESIS = 1e-12
MERGE_RADIUS = 1e-3
GOLDEN_SECTION_TOLERANCE = 1e-10
ORACLE_MAX_ATOMS = 5
ORACLE_MAX_STEINER = 2
ORACLE_DESCENT_STARTS = 3

# Paralelismo
THREADS_ENV = "RAMIFLOW_THREADS"
DEFAULT_THREADS = 1

# Configuración de salida
DEFAULT_OUTPUT_DIR = "outputs"
DEFAULT_OUTPUT_FORMAT = "json"

# SVG
SVG_SIZE = (800, 800)
SVG_MARGIN = 40
SVG_MAX_STROKE = 12.0
SVG_MIN_STROKE = 0.5
SVG_MAX_DISC = 14.0

# Configuración de logging
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
