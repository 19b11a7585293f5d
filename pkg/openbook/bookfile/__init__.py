from .models import BindingSpec, PageSpec, SolverSettings
from .parser import BookFileParser, ParsedBook, emit_book_file, load_book, parse_book_file
