from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # rank / membership threshold, relative to the largest input norm (floor 1)
    tol: float = 1e-9

    # worker threads for independent checks; 1 runs inline
    max_workers: int = 1

    # seed for randomized witness / frame choices
    seed: int = 20240601

    demo_dir: str = "data/scenarios"

    model_config = SettingsConfigDict(
        env_prefix="FELL_",
        env_file=".env",
        extra="ignore",
    )


settings = Settings()
