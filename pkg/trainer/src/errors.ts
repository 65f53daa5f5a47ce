export class EmptyMask extends Error {
  constructor(message = "loss mask selects no tokens") {
    super(message);
    this.name = "EmptyMask";
  }
}

export class DatasetError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DatasetError";
  }
}

export class ConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConfigError";
  }
}
