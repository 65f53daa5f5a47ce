/**
 * Word-level tokenizer that keeps character offsets, so the character answer
 * spans shipped in the dataset map onto token-level loss masks.
 */

export interface TokenPiece {
  text: string;
  start: number; // char offset, inclusive
  end: number; // char offset, exclusive
}

const PIECE = /[\p{L}\p{N}']+|[^\s\p{L}\p{N}]/gu;

export function tokenizePieces(text: string): TokenPiece[] {
  const pieces: TokenPiece[] = [];
  for (const match of text.matchAll(PIECE)) {
    const start = match.index ?? 0;
    pieces.push({ text: match[0].toLowerCase(), start, end: start + match[0].length });
  }
  return pieces;
}

export const BOS = 0;
export const UNK = 1;

/** Append-only piece vocabulary. Ids 0 and 1 are reserved (BOS, UNK). */
export class Vocab {
  private ids = new Map<string, number>();
  private pieces: string[] = ["<bos>", "<unk>"];

  get size(): number {
    return this.pieces.length;
  }

  add(piece: string): number {
    let id = this.ids.get(piece);
    if (id === undefined) {
      id = this.pieces.length;
      this.ids.set(piece, id);
      this.pieces.push(piece);
    }
    return id;
  }

  lookup(piece: string): number {
    return this.ids.get(piece) ?? UNK;
  }

  pieceOf(id: number): string {
    return this.pieces[id] ?? "<unk>";
  }

  static fromTexts(texts: Iterable<string>): Vocab {
    const vocab = new Vocab();
    for (const text of texts) {
      for (const piece of tokenizePieces(text)) vocab.add(piece.text);
    }
    return vocab;
  }
}

export interface EncodedText {
  tokens: number[]; // BOS followed by piece ids
  pieces: TokenPiece[]; // aligned with tokens[1..]
}

export function encode(text: string, vocab: Vocab): EncodedText {
  const pieces = tokenizePieces(text);
  const tokens = [BOS, ...pieces.map((p) => vocab.lookup(p.text))];
  return { tokens, pieces };
}

/**
 * 0/1 mask aligned with the encoded tokens. A token is masked in iff its
 * character range overlaps [spanStart, spanEnd). The BOS slot is never
 * masked; there is no prediction for it.
 */
export function maskFromSpan(encoded: EncodedText, spanStart: number, spanEnd: number): number[] {
  const mask = [0];
  for (const piece of encoded.pieces) {
    mask.push(piece.start < spanEnd && piece.end > spanStart ? 1 : 0);
  }
  return mask;
}
