ARCHIVE_TABLES = ['sweep_runs', 'sweep_samples']


def get_schema():
    """Returns the SQL schema of the sweep result archive."""
    return """
    -- One row per archived sweep
    CREATE TABLE IF NOT EXISTS sweep_runs (
        run_id TEXT PRIMARY KEY,
        kind TEXT NOT NULL,
        shape TEXT NOT NULL,
        seed INTEGER NOT NULL,
        samples INTEGER NOT NULL,
        config TEXT NOT NULL,
        summary TEXT NOT NULL
    );

    -- Per-sample results
    CREATE TABLE IF NOT EXISTS sweep_samples (
        run_id TEXT NOT NULL,
        sample_index INTEGER NOT NULL,
        param_hash TEXT NOT NULL,
        count INTEGER,
        residual REAL,
        status TEXT NOT NULL,
        PRIMARY KEY(run_id, sample_index)
    );
    """
