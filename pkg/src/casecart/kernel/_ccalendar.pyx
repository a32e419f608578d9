# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled event calendar: binary heap over C arrays keyed by (time, seq).

Pops in the same order as the pure-Python calendar in ``_pycalendar``; the
events it returns expose the same ``time``, ``seq``, ``kind`` and
``payload`` fields.
"""
from cpython.mem cimport PyMem_Malloc, PyMem_Realloc, PyMem_Free
from cpython.ref cimport PyObject, Py_INCREF, Py_XDECREF


cdef class Event:
    cdef readonly double time
    cdef readonly long long seq
    cdef readonly object kind
    cdef readonly object payload

    def __iter__(self):
        return iter((self.time, self.seq, self.kind, self.payload))

    def __eq__(self, other):
        try:
            return tuple(self) == tuple(other)
        except TypeError:
            return NotImplemented

    def __repr__(self):
        return f"Event(time={self.time!r}, seq={self.seq!r}, kind={self.kind!r}, payload={self.payload!r})"


cdef class EventCalendar:
    cdef double* _time
    cdef long long* _seq
    cdef PyObject** _ev
    cdef Py_ssize_t _n
    cdef Py_ssize_t _cap
    cdef long long _next

    def __cinit__(self):
        self._cap = 256
        self._n = 0
        self._next = 0
        self._time = <double*> PyMem_Malloc(self._cap * sizeof(double))
        self._seq = <long long*> PyMem_Malloc(self._cap * sizeof(long long))
        self._ev = <PyObject**> PyMem_Malloc(self._cap * sizeof(PyObject*))
        if not self._time or not self._seq or not self._ev:
            raise MemoryError()

    def __dealloc__(self):
        cdef Py_ssize_t i
        if self._ev:
            for i in range(self._n):
                Py_XDECREF(self._ev[i])
        PyMem_Free(self._time)
        PyMem_Free(self._seq)
        PyMem_Free(self._ev)

    def __len__(self):
        return self._n

    @property
    def inserted(self):
        return self._next

    cdef int _grow(self) except -1:
        cdef Py_ssize_t cap = self._cap * 2
        cdef double* t = <double*> PyMem_Realloc(self._time, cap * sizeof(double))
        if not t:
            raise MemoryError()
        self._time = t
        cdef long long* s = <long long*> PyMem_Realloc(self._seq, cap * sizeof(long long))
        if not s:
            raise MemoryError()
        self._seq = s
        cdef PyObject** e = <PyObject**> PyMem_Realloc(self._ev, cap * sizeof(PyObject*))
        if not e:
            raise MemoryError()
        self._ev = e
        self._cap = cap
        return 0

    cdef inline bint _less(self, double t1, long long s1, double t2, long long s2) noexcept:
        return t1 < t2 or (t1 == t2 and s1 < s2)

    cpdef long long push(self, double time, object kind, object payload=None) except -1:
        cdef Py_ssize_t i, parent
        cdef Event ev = Event.__new__(Event)
        ev.time = time
        ev.seq = self._next
        ev.kind = kind
        ev.payload = payload
        if self._n == self._cap:
            self._grow()
        i = self._n
        self._n += 1
        self._next += 1
        # sift up with a hole
        while i > 0:
            parent = (i - 1) >> 1
            if self._less(time, ev.seq, self._time[parent], self._seq[parent]):
                self._time[i] = self._time[parent]
                self._seq[i] = self._seq[parent]
                self._ev[i] = self._ev[parent]
                i = parent
            else:
                break
        self._time[i] = time
        self._seq[i] = ev.seq
        Py_INCREF(ev)
        self._ev[i] = <PyObject*> ev
        return ev.seq

    cpdef object pop(self):
        cdef Py_ssize_t i, l, r, m, n
        cdef double t
        cdef long long s
        cdef PyObject* last
        if self._n == 0:
            return None
        cdef object top = <object> self._ev[0]
        Py_XDECREF(self._ev[0])  # the local reference keeps it alive
        self._n -= 1
        n = self._n
        if n > 0:
            t = self._time[n]
            s = self._seq[n]
            last = self._ev[n]
            i = 0
            while True:
                l = 2 * i + 1
                if l >= n:
                    break
                r = l + 1
                m = l
                if r < n and self._less(self._time[r], self._seq[r], self._time[l], self._seq[l]):
                    m = r
                if self._less(self._time[m], self._seq[m], t, s):
                    self._time[i] = self._time[m]
                    self._seq[i] = self._seq[m]
                    self._ev[i] = self._ev[m]
                    i = m
                else:
                    break
            self._time[i] = t
            self._seq[i] = s
            self._ev[i] = last
        return top

    cpdef double peek_time(self):
        if self._n == 0:
            return float("inf")
        return self._time[0]
